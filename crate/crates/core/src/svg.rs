//! Standalone SVG plots. Output depends only on the data, so reruns produce
//! identical files.

use std::fmt::Write as _;

use crate::align::AlignmentPath;
use crate::histogram::{Peak, PeakAnalysis};
use crate::ingest::PitchSeries;
use crate::tuning::{CostTrace, PitchMatrix, Tuning};

const W: f64 = 900.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.03 * (hi - lo);
    (lo - pad, hi + pad)
}

fn extent(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Round tick step giving roughly `n` ticks over `span`.
fn tick_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Plot {
            x: padded(x.0, x.1),
            y: padded(y.0, y.1),
            body: String::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], class: &str) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (x, y) in pts {
            write!(d, "{:.2},{:.2} ", self.px(*x), self.py(*y)).unwrap();
        }
        writeln!(self.body, r#"<polyline class="{class}" points="{}"/>"#, d.trim_end()).unwrap();
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, class: &str) {
        writeln!(self.body, r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="{r}"/>"#, self.px(x), self.py(y)).unwrap();
    }

    fn text(&mut self, x: f64, y: f64, dy: f64, s: &str, class: &str) {
        writeln!(
            self.body,
            r#"<text class="{class}" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            self.px(x),
            self.py(y) + dy,
            esc(s)
        )
        .unwrap();
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), class: &str) {
        writeln!(
            self.body,
            r#"<line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        )
        .unwrap();
    }

    fn finish(self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        out.push_str(
            "<style>polyline{fill:none;stroke-width:1.5}.raw{stroke:#bbb}.smooth,.f0{stroke:#1f4e9c}\
             .score{stroke:#d2461e;stroke-width:2}.trace{stroke:#2a7d2a}.axis,.tick{stroke:#333}\
             .apex{fill:#d2461e}.cell{fill:#1f4e9c;fill-opacity:.6}.mean{fill:#d2461e}.err{stroke:#d2461e}\
             .grid{stroke:#eee}</style>\n",
        );
        writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(title)).unwrap();
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        writeln!(out, r#"<line class="axis" x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>"#).unwrap();
        writeln!(out, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#).unwrap();
        for (lo, hi, horizontal) in [(self.x.0, self.x.1, true), (self.y.0, self.y.1, false)] {
            let step = tick_step(hi - lo, 8.0);
            let mut t = (lo / step).ceil() * step;
            while t <= hi {
                let label = if step >= 1.0 { format!("{t:.0}") } else { format!("{t:.2}") };
                if horizontal {
                    let x = self.px(t);
                    writeln!(out, r#"<line class="tick" x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}"/>"#, y1 + 5.0).unwrap();
                    writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, y1 + 18.0).unwrap();
                } else {
                    let y = self.py(t);
                    writeln!(out, r#"<line class="grid" x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}"/>"#).unwrap();
                    writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 6.0, y + 4.0).unwrap();
                }
                t += step;
            }
        }
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, esc(xlabel)).unwrap();
        writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            esc(ylabel)
        )
        .unwrap();
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

/// Raw and smoothed histogram with one `class="apex"` marker per peak.
pub fn histogram_svg(title: &str, analysis: &PeakAnalysis, peaks: &[Peak]) -> String {
    let s = &analysis.smoothed;
    let h = &analysis.histogram;
    let x = extent((0..s.len()).map(|i| s.bin_center(i)));
    let ymax = h.max_count().max(s.max_count());
    let mut plot = Plot::new(x, (0.0, ymax));
    plot.y.0 = 0.0;
    let raw: Vec<(f64, f64)> = (0..h.len()).map(|i| (h.bin_center(i), h.counts[i])).collect();
    plot.polyline(&raw, "raw");
    let sm: Vec<(f64, f64)> = (0..s.len()).map(|i| (s.bin_center(i), s.counts[i])).collect();
    plot.polyline(&sm, "smooth");
    for p in peaks {
        let y = s.bin_of(p.center).map_or(0.0, |i| s.counts[i]);
        plot.circle(p.center, y, 4.0, "apex");
        let label = match p.note {
            Some(n) => format!("{} ({:.0})", n.name(), p.center),
            None => format!("{:.0}", p.center),
        };
        plot.text(p.center, y, -8.0, &label, "label");
    }
    plot.finish(title, "cents", "frames")
}

/// F0 in cents with the aligned score drawn as a step function.
pub fn alignment_svg(title: &str, series: &PitchSeries, path: &AlignmentPath, expected: &[f64]) -> String {
    let t = |k: usize| series.samples()[k].time;
    let voiced = series.voiced_indices();
    let cents = series.cents();
    let y = extent(voiced.iter().filter_map(|&k| cents[k]).chain(expected.iter().copied()));
    let x = (0.0, series.duration().max(series.frame_hop()));
    let mut plot = Plot::new(x, y);
    let mut run: Vec<(f64, f64)> = Vec::new();
    for (k, c) in cents.iter().enumerate() {
        match c {
            Some(c) => run.push((t(k), *c)),
            None => plot.polyline(&std::mem::take(&mut run), "f0"),
        }
    }
    plot.polyline(&run, "f0");
    let events = path.sample_events();
    let mut steps = Vec::new();
    for (k, e) in events.iter().enumerate() {
        if k > 0 && events[k - 1] != *e {
            steps.push((t(k), expected[events[k - 1]]));
        }
        steps.push((t(k), expected[*e]));
    }
    plot.polyline(&steps, "score");
    plot.finish(title, "seconds", "cents")
}

/// Every observed peak: one row of dots per piece.
pub fn matrix_svg(title: &str, m: &PitchMatrix) -> String {
    let x = extent(m.rows.iter().flatten().flatten().copied());
    let mut plot = Plot::new(x, (0.0, m.row_count().max(1) as f64 - 1.0));
    for (r, row) in m.rows.iter().enumerate() {
        for v in row.iter().flatten() {
            plot.circle(*v, r as f64, 2.5, "cell");
        }
    }
    plot.finish(title, "cents", "piece")
}

pub fn cost_svg(title: &str, trace: &CostTrace) -> String {
    let pts: Vec<(f64, f64)> = trace.values.iter().map(|(s, c)| (*s as f64, *c)).collect();
    let mut plot = Plot::new(extent(pts.iter().map(|p| p.0)), extent(pts.iter().map(|p| p.1)));
    plot.polyline(&pts, "trace");
    plot.finish(title, "step", "total column spread (cents)")
}

/// Degree means with one-sd whiskers.
pub fn tuning_svg(title: &str, tuning: &Tuning) -> String {
    let n = tuning.degrees.len();
    let y = extent(tuning.degrees.iter().flat_map(|d| [d.mean_cents - d.stdev_cents, d.mean_cents + d.stdev_cents]));
    let mut plot = Plot::new((0.0, n.max(1) as f64 - 1.0), y);
    for d in &tuning.degrees {
        let x = d.degree_index as f64;
        plot.line((x, d.mean_cents - d.stdev_cents), (x, d.mean_cents + d.stdev_cents), "err");
        plot.circle(x, d.mean_cents, 4.0, "mean");
        let label = match &d.label {
            Some(l) => format!("{l} {:.0}", d.mean_cents),
            None => format!("{:.0}", d.mean_cents),
        };
        plot.text(x, d.mean_cents, -10.0, &label, "label");
    }
    plot.finish(title, "degree", "cents")
}
