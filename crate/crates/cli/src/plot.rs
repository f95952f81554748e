//! Minimal raster plots. Numbers live in the CSV and JSON outputs; these
//! images are only for a quick look.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::diag::{HarnessError, HarnessResult};

const STOPS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn colour(t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - k as f64;
    let mix = |c: usize| (STOPS[k][c] * (1.0 - f) + STOPS[k + 1][c] * f).round() as u8;
    Rgb([mix(0), mix(1), mix(2)])
}

/// Heatmap of `values[row][col]`; rows (signal) run bottom to top.
pub fn heatmap(values: &[Vec<f64>], path: &Path) -> HarnessResult<()> {
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Ok(());
    }
    let peak = values.iter().flatten().copied().fold(0.0, f64::max);
    let cell = (480 / rows.max(cols)).max(1) as u32;
    let mut img = RgbImage::new(cols as u32 * cell, rows as u32 * cell);
    for (x, y, px) in img.enumerate_pixels_mut() {
        let r = rows - 1 - (y / cell) as usize;
        let c = (x / cell) as usize;
        *px = colour(if peak > 0.0 { values[r][c] / peak } else { 0.0 });
    }
    img.save(path).map_err(|e| HarnessError::output(path, e))
}

/// Line plot of `(x, y)` pairs without axes labels.
pub fn curve(points: &[(f64, f64)], path: &Path) -> HarnessResult<()> {
    let (w, h, pad) = (640i64, 400i64, 30i64);
    let mut img = RgbImage::from_pixel(w as u32, h as u32, Rgb([255, 255, 255]));
    let axis = Rgb([0, 0, 0]);
    for x in pad..w - pad {
        img.put_pixel(x as u32, (h - pad) as u32, axis);
    }
    for y in pad..h - pad {
        img.put_pixel(pad as u32, y as u32, axis);
    }
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if !finite.is_empty() {
        let span = |f: fn(&(f64, f64)) -> f64| {
            let lo = finite.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = finite.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        let ((x0, x1), (y0, y1)) = (span(|p| p.0), span(|p| p.1));
        let map = |(x, y): (f64, f64)| {
            let px = pad + ((x - x0) / (x1 - x0) * (w - 2 * pad) as f64).round() as i64;
            let py = h - pad - ((y - y0) / (y1 - y0) * (h - 2 * pad) as f64).round() as i64;
            (px, py)
        };
        let ink = Rgb([31, 119, 180]);
        let mut plot = |x: i64, y: i64| {
            if (0..w).contains(&x) && (0..h).contains(&y) {
                img.put_pixel(x as u32, y as u32, ink);
            }
        };
        for pair in finite.windows(2) {
            let (a, b) = (map(pair[0]), map(pair[1]));
            let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1);
            for s in 0..=steps {
                let x = a.0 + (b.0 - a.0) * s / steps;
                let y = a.1 + (b.1 - a.1) * s / steps;
                plot(x, y);
            }
        }
        for p in &finite {
            let (x, y) = map(*p);
            for dx in -2..=2 {
                for dy in -2..=2 {
                    plot(x + dx, y + dy);
                }
            }
        }
    }
    img.save(path).map_err(|e| HarnessError::output(path, e))
}
