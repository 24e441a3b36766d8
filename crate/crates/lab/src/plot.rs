//! Deterministic SVG rendering: identical data gives identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use germlab::seatangle::VolumeCurve;
use germlab::SphericalCloud;

use crate::error::{LabError, Result};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const HIST_BINS: usize = 72;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Optional symmetric error bars, one per point.
    pub err: Option<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { name: name.into(), points, err: None }
    }
}

pub enum Plot<'a> {
    /// Angle histogram for `n = 2`, two orthographic panels for `n >= 3`.
    Directions { cloud: &'a SphericalCloud, title: &'a str },
    /// Volume (or ratio) against `eps` on a log axis, with CI bars.
    Curve { curve: &'a VolumeCurve, title: &'a str, y_label: &'a str },
    Series { title: &'a str, x_label: &'a str, y_label: &'a str, log_x: bool, log_y: bool, series: &'a [Series] },
}

pub fn render(plot: &Plot) -> Result<String> {
    match plot {
        Plot::Directions { cloud, title } => Ok(directions_svg(cloud, title)),
        Plot::Curve { curve, title, y_label } => {
            if curve.entries.is_empty() {
                return Err(LabError::Plot("curve has no entries".into()));
            }
            let pts = curve.entries.iter().map(|e| (e.eps, e.volume)).collect();
            let err = curve.entries.iter().map(|e| e.half_width_ci).collect();
            let s = [Series { name: "estimate".into(), points: pts, err: Some(err) }];
            Ok(series_svg(title, "eps", y_label, true, false, &s))
        }
        Plot::Series { title, x_label, y_label, log_x, log_y, series } => {
            if series.iter().all(|s| s.points.is_empty()) {
                return Err(LabError::Plot("no data points".into()));
            }
            Ok(series_svg(title, x_label, y_label, *log_x, *log_y, series))
        }
    }
}

pub fn emit_plot(plot: &Plot, path: &Path) -> Result<()> {
    let svg = render(plot)?;
    std::fs::write(path, svg)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, w: u32, h: u32, title: &str) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, w / 2, escape(title));
}

fn directions_svg(cloud: &SphericalCloud, title: &str) -> String {
    let mut out = String::new();
    if cloud.is_empty() {
        header(&mut out, 400, 240, title);
        out.push_str("<text x=\"200\" y=\"130\" text-anchor=\"middle\" font-size=\"16\">∅ (dim −1)</text>\n</svg>\n");
        return out;
    }
    if cloud.ambient_dim() == 2 {
        angle_histogram(&mut out, cloud, title);
    } else {
        projections(&mut out, cloud, title);
    }
    out
}

fn angle_histogram(out: &mut String, cloud: &SphericalCloud, title: &str) {
    let (w, h) = (520u32, 300u32);
    header(out, w, h, title);
    let mut bins = [0usize; HIST_BINS];
    for v in cloud.vectors() {
        let a = v[1].atan2(v[0]);
        let k = (((a + std::f64::consts::PI) / std::f64::consts::TAU) * HIST_BINS as f64).floor() as usize;
        bins[k.min(HIST_BINS - 1)] += 1;
    }
    let max = *bins.iter().max().unwrap_or(&1) as f64;
    let (x0, y0, pw, ph) = (50.0, 40.0, 440.0, 210.0);
    let bw = pw / HIST_BINS as f64;
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for (k, &c) in bins.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let bh = ph * c as f64 / max;
        let _ = writeln!(
            out,
            r#"<rect class="bin" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x0 + k as f64 * bw,
            y0 + ph - bh,
            bw,
            bh,
            PALETTE[0]
        );
    }
    for (i, lab) in ["-π", "-π/2", "0", "π/2", "π"].iter().enumerate() {
        let x = x0 + pw * i as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{lab}</text>"#, y0 + ph + 16.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">angle (rad), {} directions, max bin {}</text>"#, x0 + pw / 2.0, y0 + ph + 34.0, cloud.len(), max);
    out.push_str("</svg>\n");
}

fn projections(out: &mut String, cloud: &SphericalCloud, title: &str) {
    let (w, h) = (620u32, 340u32);
    header(out, w, h, title);
    let r = 130.0;
    for (panel, (j, name)) in [(1usize, "x1-x2"), (2usize, "x1-x3")].into_iter().enumerate() {
        let cx = 160.0 + 300.0 * panel as f64;
        let cy = 180.0;
        let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="gray"/>"#);
        let _ = writeln!(out, r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{name} projection</text>"#, cy + r + 20.0);
        for v in cloud.vectors() {
            let _ = writeln!(
                out,
                r#"<circle class="pt" cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#,
                cx + r * v[0],
                cy - r * v[j],
                PALETTE[panel]
            );
        }
    }
    out.push_str("</svg>\n");
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { if v > 0.0 { v.log10() } else { continue } } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Axis { lo: lo - pad, hi: hi + pad, log }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v > 0.0 {
                v.log10()
            } else {
                return None;
            }
        } else {
            v
        };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn tick_label(&self, f: f64) -> String {
        let v = self.lo + f * (self.hi - self.lo);
        if self.log {
            format!("{:.2e}", 10f64.powf(v))
        } else {
            format!("{v:.3}")
        }
    }
}

fn series_svg(title: &str, x_label: &str, y_label: &str, log_x: bool, log_y: bool, series: &[Series]) -> String {
    let mut out = String::new();
    let (w, h) = (620u32, 380u32);
    header(&mut out, w, h, title);
    let (x0, y0, pw, ph) = (80.0, 40.0, 500.0, 270.0);
    let xa = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), log_x);
    let ya = Axis::fit(
        series.iter().flat_map(|s| {
            s.points.iter().enumerate().flat_map(move |(i, p)| {
                let e = s.err.as_ref().map_or(0.0, |e| e[i]);
                [p.1 - e, p.1 + e]
            })
        }),
        log_y,
    );
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, x0 + pw * f, y0 + ph + 16.0, xa.tick_label(f));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, y0 + ph * (1.0 - f) + 4.0, ya.tick_label(f));
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, x0 + pw / 2.0, y0 + ph + 36.0, escape(x_label));
    let _ = writeln!(out, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#, y0 + ph / 2.0, y0 + ph / 2.0, escape(y_label));
    let px = |v: f64| xa.frac(v).map(|f| x0 + pw * f);
    let py = |v: f64| ya.frac(v).map(|f| y0 + ph * (1.0 - f));
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<(f64, f64)> = s.points.iter().filter_map(|&(x, y)| Some((px(x)?, py(y)?))).collect();
        if coords.len() > 1 {
            let path: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#, path.join(" "));
        }
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let (Some(cx), Some(cy)) = (px(x), py(y)) else { continue };
            if let Some(e) = s.err.as_ref().map(|e| e[i]) {
                if let (Some(lo), Some(hi)) = (py(y - e).or(Some(y0 + ph)), py(y + e)) {
                    let _ = writeln!(out, r#"<line class="ci" x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{hi:.2}" stroke="{color}"/>"#);
                }
            }
            let _ = writeln!(out, r#"<circle class="marker" cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{color}"/>"#);
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#, x0 + 8.0, y0 + 14.0 + 14.0 * k as f64, escape(&s.name));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use germlab::seatangle::{STParams, VolumeEntry};

    fn curve(n: usize) -> VolumeCurve {
        VolumeCurve {
            entries: (0..n)
                .map(|k| VolumeEntry { eps: 0.1 * 0.5f64.powi(k as i32), volume: 1.0 / (k + 1) as f64, half_width_ci: 0.05, hits: 1000, denominator_hits: None })
                .collect(),
            params: STParams::new(1.5, 0.5).unwrap(),
            denominator_c: None,
            sample_count: 10_000,
        }
    }

    #[test]
    fn curve_has_one_marker_and_bar_per_entry() {
        let c = curve(5);
        let svg = render(&Plot::Curve { curve: &c, title: "t", y_label: "v" }).unwrap();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 5);
        assert_eq!(svg.matches(r#"class="ci""#).count(), 5);
        assert_eq!(svg, render(&Plot::Curve { curve: &c, title: "t", y_label: "v" }).unwrap());
    }

    #[test]
    fn empty_cloud_is_annotated() {
        let svg = render(&Plot::Directions { cloud: &SphericalCloud::empty(3, ""), title: "D" }).unwrap();
        assert!(svg.contains("∅ (dim −1)"));
    }

    #[test]
    fn sphere_cloud_has_two_panels() {
        let c = SphericalCloud::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]], "").unwrap();
        let svg = render(&Plot::Directions { cloud: &c, title: "D" }).unwrap();
        assert!(svg.contains("x1-x2 projection") && svg.contains("x1-x3 projection"));
        assert_eq!(svg.matches(r#"class="pt""#).count(), 4);
    }

    #[test]
    fn empty_curve_is_rejected() {
        assert!(render(&Plot::Curve { curve: &curve(0), title: "t", y_label: "v" }).is_err());
    }
}
