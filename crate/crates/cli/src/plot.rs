//! Static SVG plots from a rates artifact: per boundary condition, a log-log
//! error-vs-ε panel with the fitted lines and a log-log λ_k-vs-k growth panel
//! with the theoretical reference slope. Output is plain text assembled in a
//! fixed order, hence byte-deterministic.

use homogeig::problems::BcTag;
use homogeig::Real;

use crate::output::RatesArtifact;

const W: f64 = 460.0;
const H: f64 = 360.0;
const MARGIN: f64 = 48.0;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    ox: f64,
}

impl Axes {
    fn new(xs: &[f64], ys: &[f64], ox: f64) -> Self {
        let pad = |lo: f64, hi: f64| {
            let d = (hi - lo).max(1e-12);
            (lo - 0.06 * d, hi + 0.06 * d)
        };
        let (x0, x1) = pad(
            xs.iter().cloned().fold(f64::MAX, f64::min),
            xs.iter().cloned().fold(f64::MIN, f64::max),
        );
        let (y0, y1) = pad(
            ys.iter().cloned().fold(f64::MAX, f64::min),
            ys.iter().cloned().fold(f64::MIN, f64::max),
        );
        Self { x0, x1, y0, y1, ox }
    }

    fn px(&self, x: f64) -> f64 {
        self.ox + MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn frame(out: &mut String, ax: &Axes, title: &str, xlabel: &str, ylabel: &str) {
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        fmt(ax.ox + MARGIN),
        fmt(MARGIN),
        fmt(W - 2.0 * MARGIN),
        fmt(H - 2.0 * MARGIN)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        fmt(ax.ox + W / 2.0),
        fmt(MARGIN - 14.0),
        title
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
        fmt(ax.ox + W / 2.0),
        fmt(H - 10.0),
        xlabel
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 {} {})\">{}</text>\n",
        fmt(ax.ox + 14.0),
        fmt(H / 2.0),
        fmt(ax.ox + 14.0),
        fmt(H / 2.0),
        ylabel
    ));
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dashed: bool) {
    if pts.len() < 2 {
        return;
    }
    let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", fmt(x), fmt(y))).collect();
    let dash = if dashed { " stroke-dasharray=\"5,4\"" } else { "" };
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.4\"{}/>\n",
        d.join(" "),
        color,
        dash
    ));
}

fn circles(out: &mut String, pts: &[(f64, f64)], color: &str) {
    for &(x, y) in pts {
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
            fmt(x),
            fmt(y),
            color
        ));
    }
}

/// Render one boundary condition of the artifact into a standalone SVG.
/// Returns `None` when the artifact holds no usable data for that tag.
pub fn render_bc(artifact: &RatesArtifact, bc: BcTag) -> Option<String> {
    let curves: Vec<_> = artifact
        .curves
        .iter()
        .filter(|c| c.bc == bc && c.points.iter().any(|p| p.1 > 0.0))
        .collect();
    let growth = artifact.growth_points.iter().find(|g| g.bc == bc);
    if curves.is_empty() && growth.is_none() {
        return None;
    }
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        2.0 * W,
        H,
        2.0 * W,
        H
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // left panel: log10 error vs log10 epsilon with fitted lines
    if !curves.is_empty() {
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        for c in &curves {
            for &(e, err) in &c.points {
                if err > 0.0 {
                    lx.push(e.log10());
                    ly.push(err.log10());
                }
            }
        }
        let ax = Axes::new(&lx, &ly, 0.0);
        frame(
            &mut out,
            &ax,
            &format!("|lambda_k^eps - lambda_k| vs eps ({})", bc.short()),
            "log10 eps",
            "log10 error",
        );
        for (i, c) in curves.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<(f64, f64)> = c
                .points
                .iter()
                .filter(|p| p.1 > 0.0)
                .map(|&(e, err)| (ax.px(e.log10()), ax.py(err.log10())))
                .collect();
            circles(&mut out, &pts, color);
            if let Some(cell) = artifact
                .report
                .cells
                .iter()
                .find(|cell| cell.bc == c.bc && cell.k == c.k && !cell.degenerate)
            {
                // fitted line err = constant * eps^slope in log10 space
                let line: Vec<(f64, f64)> = [ax.x0, ax.x1]
                    .iter()
                    .map(|&gx| {
                        let gy = cell.constant.log10() + cell.slope * gx;
                        (ax.px(gx), ax.py(gy.clamp(ax.y0, ax.y1)))
                    })
                    .collect();
                polyline(&mut out, &line, color, false);
            }
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"{}\">k={}</text>\n",
                fmt(W - MARGIN + 4.0),
                fmt(MARGIN + 14.0 * (i as f64 + 1.0)),
                color,
                c.k
            ));
        }
    }

    // right panel: log10 lambda_k vs log10 k with the reference growth slope
    if let Some(g) = growth {
        let usable: Vec<(usize, Real)> =
            g.points.iter().filter(|p| p.1 > 0.0).cloned().collect();
        if usable.len() >= 2 {
            let lx: Vec<f64> = usable.iter().map(|p| (p.0 as f64).log10()).collect();
            let ly: Vec<f64> = usable.iter().map(|p| p.1.log10()).collect();
            let ax = Axes::new(&lx, &ly, W);
            let n = artifact.dim as f64;
            let reference = if bc == BcTag::Steklov && artifact.dim == 2 {
                (artifact.p - 1.0) / (n - 1.0)
            } else {
                artifact.p / n
            };
            frame(
                &mut out,
                &ax,
                &format!("lambda_k vs k ({}), reference slope {:.2}", bc.short(), reference),
                "log10 k",
                "log10 lambda",
            );
            let pts: Vec<(f64, f64)> = lx
                .iter()
                .zip(&ly)
                .map(|(&x, &y)| (ax.px(x), ax.py(y)))
                .collect();
            circles(&mut out, &pts, COLORS[0]);
            polyline(&mut out, &pts, COLORS[0], false);
            // reference slope line anchored at the first point
            let (ax0, ay0) = (lx[0], ly[0]);
            let line: Vec<(f64, f64)> = [ax.x0, ax.x1]
                .iter()
                .map(|&gx| {
                    let gy = ay0 + reference * (gx - ax0);
                    (ax.px(gx), ax.py(gy.clamp(ax.y0, ax.y1)))
                })
                .collect();
            polyline(&mut out, &line, "#777777", true);
        }
    }

    out.push_str("</svg>\n");
    Some(out)
}
