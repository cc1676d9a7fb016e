//! Two-series histograms of a profile: function count per distance (green)
//! and mean theta per distance (red).

use std::fmt::Write as _;

use patclass_core::experiment::ProfileRow;
use patclass_core::DistanceProfile;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum HistogramFormat {
    Ascii,
    Svg,
}

/// Width of every ASCII bar in columns.
pub const ASCII_BAR_WIDTH: usize = 60;

/// Rows for every distance from the first to the last populated one, with
/// gaps filled by empty rows.
fn span(profile: &DistanceProfile) -> Result<Vec<ProfileRow>, CliError> {
    let rows = profile.rows();
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return Err(CliError::Usage("cannot draw a histogram of an empty profile".into()));
    };
    let mut out = Vec::new();
    let mut it = rows.iter().peekable();
    for d in first.distance..=last.distance {
        match it.peek() {
            Some(r) if r.distance == d => out.push(*it.next().unwrap()),
            _ => out.push(ProfileRow {
                distance: d,
                count: 0,
                mean_theta: 0.0,
                min_theta: 0.0,
                max_theta: 0.0,
            }),
        }
    }
    Ok(out)
}

fn title(profile: &DistanceProfile) -> String {
    format!(
        "length {}, recipe {} ({})",
        profile.length(),
        profile.recipe,
        profile.mode
    )
}

fn bar(fraction: f64) -> String {
    let filled = (fraction.clamp(0.0, 1.0) * ASCII_BAR_WIDTH as f64).round() as usize;
    format!("{}{}", "#".repeat(filled), " ".repeat(ASCII_BAR_WIDTH - filled))
}

pub fn ascii_histogram(profile: &DistanceProfile) -> Result<String, CliError> {
    let rows = span(profile)?;
    let max_count = rows.iter().map(|r| r.count).max().unwrap_or(1).max(1);
    let mut s = String::new();
    writeln!(s, "{}", title(profile)).unwrap();
    writeln!(s).unwrap();
    writeln!(s, "function count per distance (full bar = {max_count})").unwrap();
    for r in &rows {
        writeln!(
            s,
            "{:>4} |{}| {}",
            r.distance,
            bar(r.count as f64 / max_count as f64),
            r.count
        )
        .unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "mean theta per distance (full bar = 1.0)").unwrap();
    for r in &rows {
        let value = if r.count == 0 {
            "-".to_string()
        } else {
            format!("{:.6}", r.mean_theta)
        };
        writeln!(s, "{:>4} |{}| {value}", r.distance, bar(r.mean_theta)).unwrap();
    }
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const COUNT_COLOR: &str = "#2e8b57";
const THETA_COLOR: &str = "#d62728";

/// Standalone SVG document with no external references.
pub fn svg_histogram(profile: &DistanceProfile) -> Result<String, CliError> {
    let rows = span(profile)?;
    let max_count = rows.iter().map(|r| r.count).max().unwrap_or(1).max(1) as f64;
    let (width, height) = (860.0, 420.0);
    let (left, right, top, bottom) = (70.0, 70.0, 50.0, 60.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let slot = plot_w / rows.len() as f64;
    let base = top + plot_h;

    let mut s = String::new();
    writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(&title(profile))
    )
    .unwrap();

    writeln!(s, r#"<g stroke="black" stroke-width="1">"#).unwrap();
    writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{base}"/>"#).unwrap();
    writeln!(s, r#"<line x1="{left}" y1="{base}" x2="{}" y2="{base}"/>"#, left + plot_w).unwrap();
    writeln!(s, r#"<line x1="{0}" y1="{top}" x2="{0}" y2="{base}"/>"#, left + plot_w).unwrap();
    writeln!(s, "</g>").unwrap();

    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let y = base - f * plot_h;
        writeln!(
            s,
            r#"<text x="{}" y="{y:.1}" text-anchor="end" fill="{COUNT_COLOR}">{}</text>"#,
            left - 6.0,
            (f * max_count).round()
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{y:.1}" fill="{THETA_COLOR}">{f:.2}</text>"#,
            left + plot_w + 6.0
        )
        .unwrap();
    }

    let mut line = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let x0 = left + i as f64 * slot;
        let bar_w = slot * 0.4;
        let ch = r.count as f64 / max_count * plot_h;
        let th = r.mean_theta.clamp(0.0, 1.0) * plot_h;
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="{ch:.2}" fill="{COUNT_COLOR}"><title>d={} count={}</title></rect>"#,
            x0 + slot * 0.1,
            base - ch,
            r.distance,
            r.count
        )
        .unwrap();
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="{th:.2}" fill="{THETA_COLOR}" fill-opacity="0.6"><title>d={} theta={}</title></rect>"#,
            x0 + slot * 0.5,
            base - th,
            r.distance,
            r.mean_theta
        )
        .unwrap();
        if r.count > 0 {
            line.push(format!("{:.2},{:.2}", x0 + slot * 0.7, base - th));
        }
        let label_every = rows.len().div_ceil(32);
        if i % label_every == 0 {
            writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                x0 + slot * 0.5,
                base + 16.0,
                r.distance
            )
            .unwrap();
        }
    }
    if line.len() > 1 {
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{THETA_COLOR}" stroke-width="2"/>"#,
            line.join(" ")
        )
        .unwrap();
    }

    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Hamming distance to the class</text>"#,
        left + plot_w / 2.0,
        height - 20.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{0}" transform="rotate(-90 16 {0})" text-anchor="middle" fill="{COUNT_COLOR}">function count</text>"#,
        top + plot_h / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{0}" y="{1}" transform="rotate(90 {0} {1})" text-anchor="middle" fill="{THETA_COLOR}">mean theta</text>"#,
        width - 16.0,
        top + plot_h / 2.0
    )
    .unwrap();
    writeln!(s, "</svg>").unwrap();
    Ok(s)
}

pub fn render(profile: &DistanceProfile, format: HistogramFormat) -> Result<String, CliError> {
    match format {
        HistogramFormat::Ascii => ascii_histogram(profile),
        HistogramFormat::Svg => svg_histogram(profile),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use patclass_core::{exhaustive_profile, ProfileMode, Recipe};

    #[test]
    fn ascii_bars_have_fixed_width() {
        let p = exhaustive_profile(&"H,C2".parse().unwrap(), None).unwrap();
        let text = ascii_histogram(&p).unwrap();
        let bars: Vec<&str> = text.lines().filter(|l| l.contains('|')).collect();
        assert_eq!(bars.len(), 2 * 5);
        for l in &bars {
            let inner = l.split('|').nth(1).unwrap();
            assert_eq!(inner.len(), ASCII_BAR_WIDTH);
        }
        // 0.5625 of 60 columns, rounded.
        assert!(text.contains(&format!("   1 |{}{}| 0.562500", "#".repeat(34), " ".repeat(26))));
        assert!(text.contains(&format!("   4 |{}| 0.000000", " ".repeat(60))));
    }

    #[test]
    fn empty_profile_is_a_usage_error() {
        let r: Recipe = "C2".parse().unwrap();
        let p = DistanceProfile::empty(r, ProfileMode::Exhaustive, None);
        assert!(matches!(ascii_histogram(&p), Err(CliError::Usage(_))));
        assert!(matches!(svg_histogram(&p), Err(CliError::Usage(_))));
    }

    #[test]
    fn svg_has_both_series() {
        let p = exhaustive_profile(&"C2,C2".parse().unwrap(), None).unwrap();
        let svg = svg_histogram(&p).unwrap();
        assert_eq!(svg.matches(COUNT_COLOR).count() >= 11, true);
        assert!(svg.contains("<polyline"));
        assert!(!svg.contains("href"));
    }
}
