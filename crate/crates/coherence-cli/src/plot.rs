//! Static SVG plots: data with error bars plus a model curve, or a set of
//! line series (waveforms, efficiency curves). Deterministic output, no
//! external renderer.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 52.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    /// 1σ error bars on y, parallel to `points`.
    pub y_err: Option<Vec<f64>>,
    /// Draw markers (data) or a connected line (model curve).
    pub markers: bool,
    pub color: &'a str,
}

struct AxisMap {
    lo: f64,
    hi: f64,
    scale: Scale,
    pix_lo: f64,
    pix_hi: f64,
}

impl AxisMap {
    fn new(values: impl Iterator<Item = f64>, scale: Scale, pix_lo: f64, pix_hi: f64) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if scale == Scale::Log10 && v <= 0.0 {
                continue;
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let (lo, hi) = match scale {
            Scale::Linear => {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
            Scale::Log10 => {
                let (llo, lhi) = (lo.log10(), hi.log10());
                let pad = 0.05 * (lhi - llo).max(0.1);
                (10f64.powf(llo - pad), 10f64.powf(lhi + pad))
            }
        };
        AxisMap { lo, hi, scale, pix_lo, pix_hi }
    }

    fn map(&self, v: f64) -> Option<f64> {
        let t = match self.scale {
            Scale::Linear => (v - self.lo) / (self.hi - self.lo),
            Scale::Log10 => {
                if v <= 0.0 {
                    return None;
                }
                (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
            }
        };
        Some(self.pix_lo + t * (self.pix_hi - self.pix_lo))
    }

    fn ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Linear => {
                let n = 6;
                (0..n)
                    .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                    .collect()
            }
            Scale::Log10 => {
                let lo = self.lo.log10().ceil() as i32;
                let hi = self.hi.log10().floor() as i32;
                if hi - lo >= 1 {
                    (lo..=hi).map(|e| 10f64.powi(e)).collect()
                } else {
                    let n = 5;
                    let (a, b) = (self.lo.log10(), self.hi.log10());
                    (0..n)
                        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                        .collect()
                }
            }
        }
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

/// Render a figure to an SVG file.
pub fn render(path: &Path, figure: &Figure, series: &[Series<'_>]) -> Result<()> {
    let xm = AxisMap::new(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        figure.x_scale,
        MARGIN_L,
        WIDTH - MARGIN_R,
    );
    let ym = AxisMap::new(
        series.iter().flat_map(|s| {
            s.points.iter().enumerate().flat_map(move |(i, p)| {
                let e = s.y_err.as_ref().map_or(0.0, |e| e[i]);
                [p.1 - e, p.1 + e]
            })
        }),
        figure.y_scale,
        HEIGHT - MARGIN_B,
        MARGIN_T,
    );

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(&figure.title)
    );

    // axes box
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    );
    for t in xm.ticks() {
        if let Some(px) = xm.map(t) {
            let y0 = HEIGHT - MARGIN_B;
            let _ = writeln!(
                svg,
                r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/>"#,
                y0 + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 18.0,
                tick_label(t)
            );
        }
    }
    for t in ym.ticks() {
        if let Some(py) = ym.map(t) {
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{py:.2}" x2="{MARGIN_L}" y2="{py:.2}" stroke="black"/>"#,
                MARGIN_L - 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_L - 8.0,
                py + 4.0,
                tick_label(t)
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        xml_escape(&figure.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        xml_escape(&figure.y_label)
    );

    for (si, s) in series.iter().enumerate() {
        if s.markers {
            for (i, &(x, y)) in s.points.iter().enumerate() {
                let (Some(px), Some(py)) = (xm.map(x), ym.map(y)) else { continue };
                if let Some(errs) = &s.y_err {
                    let (lo, hi) = (y - errs[i], y + errs[i]);
                    if let (Some(plo), Some(phi)) = (ym.map(lo), ym.map(hi)) {
                        let _ = writeln!(
                            svg,
                            r#"<line x1="{px:.2}" y1="{plo:.2}" x2="{px:.2}" y2="{phi:.2}" stroke="{}"/>"#,
                            s.color
                        );
                    }
                }
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{}"/>"#,
                    s.color
                );
            }
        } else {
            let mut d = String::new();
            let mut pen_down = false;
            for &(x, y) in &s.points {
                match (xm.map(x), ym.map(y)) {
                    (Some(px), Some(py)) => {
                        let cmd = if pen_down { 'L' } else { 'M' };
                        let _ = write!(d, "{cmd}{px:.2} {py:.2} ");
                        pen_down = true;
                    }
                    _ => pen_down = false,
                }
            }
            let _ = writeln!(
                svg,
                r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                d.trim_end(),
                s.color
            );
        }
        // legend entry
        let ly = MARGIN_T + 16.0 + 16.0 * si as f64;
        let lx = WIDTH - MARGIN_R - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#,
            lx + 18.0,
            s.color
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            xml_escape(s.label)
        );
    }
    let _ = writeln!(svg, "</svg>");

    std::fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_scatter_and_curve() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fig.svg");
        let fig = Figure {
            title: "test".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log10,
        };
        let series = [
            Series {
                label: "data",
                points: vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)],
                y_err: Some(vec![0.05, 0.03, 0.02]),
                markers: true,
                color: "black",
            },
            Series {
                label: "fit",
                points: (0..50).map(|i| (i as f64 / 25.0, (-(i as f64) / 25.0).exp2())).collect(),
                y_err: None,
                markers: false,
                color: "crimson",
            },
        ];
        render(&path, &fig, &series).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("circle"));
        assert!(text.contains("path"));
        assert!(text.ends_with("</svg>\n"));
    }
}
