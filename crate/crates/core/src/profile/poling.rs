use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// One poled domain `[left, right)` with orientation −1, 0 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub left: f64,
    pub right: f64,
    pub orientation: i8,
}

impl Domain {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

/// Poling orientation `g(z)` over a device of length `L`. Positions not
/// covered by any domain carry the background orientation +1.
#[derive(Debug, Clone, PartialEq)]
pub struct PolingPattern {
    domains: Vec<Domain>,
    length: f64,
}

impl PolingPattern {
    pub fn new(domains: Vec<Domain>, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidPattern(format!("device length must be positive, got {length}")));
        }
        let mut previous = 0.0;
        for d in &domains {
            if !(d.left >= previous && d.right > d.left && d.right <= length) {
                return Err(Error::InvalidPattern(format!(
                    "domain [{}, {}) is not ordered inside [0, {length}]",
                    d.left, d.right
                )));
            }
            if !(-1..=1).contains(&d.orientation) {
                return Err(Error::InvalidPattern(format!("orientation {} is not in {{-1, 0, 1}}", d.orientation)));
            }
            previous = d.right;
        }
        Ok(Self { domains, length })
    }

    /// Uniform background orientation, no poled domains.
    pub fn unpoled(length: f64) -> Result<Self> {
        Self::new(Vec::new(), length)
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// All distinct domain walls, including the device ends.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        for d in &self.domains {
            for z in [d.left, d.right] {
                if z > *b.last().unwrap() {
                    b.push(z);
                }
            }
        }
        if *b.last().unwrap() < self.length {
            b.push(self.length);
        }
        b
    }

    pub fn inverted_count(&self) -> usize {
        self.domains.iter().filter(|d| d.orientation == -1).count()
    }

    pub fn min_domain_width(&self) -> f64 {
        self.domains.iter().map(Domain::width).fold(f64::INFINITY, f64::min)
    }

    /// `g(z)`; a position on a wall takes the value of the domain to its right.
    pub fn sample_g(&self, z: f64) -> Result<i8> {
        if !(0.0..=self.length).contains(&z) {
            return Err(Error::OutOfRange { z, length: self.length });
        }
        Ok(self.orientation_at(z))
    }

    pub(crate) fn orientation_at(&self, z: f64) -> i8 {
        let k = self.domains.partition_point(|d| d.left <= z);
        match k.checked_sub(1).map(|k| &self.domains[k]) {
            Some(d) if z < d.right => d.orientation,
            _ => 1,
        }
    }

    /// `h(z)`: the χ⁽³⁾ material fills the whole device.
    pub fn sample_h(&self, z: f64) -> Result<u8> {
        if !(0.0..=self.length).contains(&z) {
            return Err(Error::OutOfRange { z, length: self.length });
        }
        Ok(1)
    }

    /// `∫₀^L g(z) e^{ikz} dz`, exact for the piecewise-constant pattern.
    pub fn fourier(&self, k: f64) -> Complex64 {
        let segment = |a: f64, b: f64| -> Complex64 {
            if k == 0.0 {
                Complex64::new(b - a, 0.0)
            } else {
                let i = Complex64::new(0.0, 1.0);
                ((i * k * b).exp() - (i * k * a).exp()) / (i * k)
            }
        };
        let mut total = Complex64::new(0.0, 0.0);
        let mut cursor = 0.0;
        for d in &self.domains {
            if d.left > cursor {
                total += segment(cursor, d.left);
            }
            total += segment(d.left, d.right) * f64::from(d.orientation);
            cursor = d.right;
        }
        if self.length > cursor {
            total += segment(cursor, self.length);
        }
        total
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(["z_left_m", "z_right_m", "orientation"]).map_err(|e| Error::io(path, e))?;
        for d in &self.domains {
            w.write_record([format!("{:e}", d.left), format!("{:e}", d.right), d.orientation.to_string()])
                .map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>, length: f64) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::io(path, e))?;
        let headers = r.headers().map_err(|e| Error::io(path, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["z_left_m", "z_right_m", "orientation"] {
            return Err(Error::InvalidPattern(format!("unexpected header {headers:?}")));
        }
        let mut domains = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::io(path, e))?;
            let parse = |k: usize| -> Result<f64> {
                record[k].parse::<f64>().map_err(|e| Error::InvalidPattern(format!("{}: {e}", &record[k])))
            };
            let orientation = record[2]
                .parse::<i8>()
                .map_err(|e| Error::InvalidPattern(format!("{}: {e}", &record[2])))?;
            domains.push(Domain { left: parse(0)?, right: parse(1)?, orientation });
        }
        Self::new(domains, length)
    }
}

/// Periodic poling starting with a non-inverted domain; the inverted part of
/// each period has width `duty·period`. The final partial period is truncated.
pub fn periodic_poling(period: f64, length: f64, duty: f64) -> Result<PolingPattern> {
    if !(period > 0.0) || period > length {
        return Err(Error::InvalidPattern(format!("period {period} must be in (0, {length}]")));
    }
    if !(duty > 0.0 && duty < 1.0) {
        return Err(Error::InvalidPattern(format!("duty cycle {duty} must be in (0, 1)")));
    }
    let mut domains = Vec::new();
    let mut k = 0usize;
    loop {
        let start = k as f64 * period;
        if start >= length * (1.0 - 1e-12) {
            break;
        }
        let flip = start + (1.0 - duty) * period;
        let end = ((k + 1) as f64 * period).min(length);
        domains.push(Domain { left: start, right: flip.min(length), orientation: 1 });
        if flip < length * (1.0 - 1e-12) {
            domains.push(Domain { left: flip, right: end, orientation: -1 });
        }
        k += 1;
    }
    if let Some(last) = domains.last_mut() {
        last.right = length;
    }
    PolingPattern::new(domains, length)
}

/// Pattern whose windowed first harmonic follows `target(z)` (peak ≤ 1).
///
/// The device is cut into cells of half a period; each cell is given the
/// orientation that keeps the running phase-matching integral closest to
/// that of an ideal apodized grating.
pub fn apodized_poling(target: impl Fn(f64) -> f64, period: f64, length: f64) -> Result<PolingPattern> {
    if !(period > 0.0) || period > length {
        return Err(Error::InvalidPattern(format!("period {period} must be in (0, {length}]")));
    }
    let cell = 0.5 * period;
    let cells = ((length / cell) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let samples: Vec<f64> = (0..=4 * cells).map(|k| target((k as f64 * cell / 4.0).min(length))).collect();
    let peak = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(bad) = samples.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidPattern(format!("apodization target must be non-negative, got {bad}")));
    }
    if peak > 1.0 + 1e-12 {
        return Err(Error::InfeasibleApodization { peak });
    }
    let k0 = 2.0 * std::f64::consts::PI / period;
    let i = Complex64::new(0.0, 1.0);
    let ideal_rate = i * (2.0 / std::f64::consts::PI);

    let mut domains: Vec<Domain> = Vec::new();
    let mut realized = Complex64::new(0.0, 0.0);
    let mut ideal = Complex64::new(0.0, 0.0);
    for c in 0..cells {
        let a = c as f64 * cell;
        let b = ((c + 1) as f64 * cell).min(length);
        // Simpson over the cell, on the quarter-cell samples.
        let h = (b - a) / 2.0;
        let (t0, t1, t2) = (samples[4 * c], target(0.5 * (a + b)), target(b));
        ideal += ideal_rate * h / 3.0 * (t0 + 4.0 * t1 + t2);
        let contribution = ((i * k0 * b).exp() - (i * k0 * a).exp()) / (i * k0);
        let plus = (realized + contribution - ideal).norm();
        let minus = (realized - contribution - ideal).norm();
        let orientation: i8 = if plus <= minus { 1 } else { -1 };
        realized += contribution * f64::from(orientation);
        match domains.last_mut() {
            Some(d) if d.orientation == orientation => d.right = b,
            _ => domains.push(Domain { left: a, right: b, orientation }),
        }
    }
    if let Some(last) = domains.last_mut() {
        last.right = length;
    }
    PolingPattern::new(domains, length)
}

/// Fabrication errors applied to inverted domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainErrorModel {
    /// Outward shift of each inverted-domain wall (m); negative narrows.
    pub shift: f64,
    /// Probability that an inverted domain is not written.
    pub missing_probability: f64,
    pub seed: u64,
}

/// Applies missing-domain reversion and then wall shifts.
///
/// Each inverted domain draws one uniform number from a ChaCha8 stream
/// seeded with `errors.seed` and reverts to +1 when it falls below `p`.
/// The walls of the surviving inverted domains move outward by `shift`;
/// neighbouring walls that would cross meet halfway instead.
pub fn inject_domain_errors(pattern: &PolingPattern, errors: &DomainErrorModel) -> Result<PolingPattern> {
    let p = errors.missing_probability;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidPattern(format!("missing-domain probability {p} outside [0, 1]")));
    }
    let min_width = pattern.min_domain_width();
    if errors.shift.abs() >= min_width {
        return Err(Error::OverBroadening { shift: errors.shift, min_width });
    }
    if errors.shift == 0.0 && p == 0.0 {
        return Ok(pattern.clone());
    }

    let mut rng = seed::rng(errors.seed);
    let mut segments: Vec<Domain> = Vec::with_capacity(pattern.domains.len() * 2);
    let mut cursor = pattern.domains.first().map_or(0.0, |d| d.left);
    for d in &pattern.domains {
        if d.left > cursor {
            segments.push(Domain { left: cursor, right: d.left, orientation: 1 });
        }
        let mut d = *d;
        if d.orientation == -1 {
            let draw: f64 = rng.gen();
            if draw < p {
                d.orientation = 1;
            }
        }
        segments.push(d);
        cursor = d.right;
    }
    let segments = merge(segments);
    if segments.is_empty() {
        return PolingPattern::new(segments, pattern.length);
    }

    let (lo, hi) = (segments[0].left, segments[segments.len() - 1].right);
    // Interior walls, moved toward the non-inverted side.
    let mut walls: Vec<f64> = segments.windows(2).map(|w| {
        let z = w[0].right;
        match (w[0].orientation, w[1].orientation) {
            (-1, o) if o != -1 => z + errors.shift,
            (o, -1) if o != -1 => z - errors.shift,
            _ => z,
        }
        .clamp(lo, hi)
    }).collect();
    // Collapse segments whose walls crossed.
    for k in 1..walls.len() {
        if walls[k] < walls[k - 1] {
            let mid = 0.5 * (walls[k] + walls[k - 1]);
            walls[k] = mid;
            walls[k - 1] = mid;
        }
    }
    let mut out = Vec::with_capacity(segments.len());
    for (k, s) in segments.iter().enumerate() {
        let left = if k == 0 { lo } else { walls[k - 1] };
        let right = if k + 1 == segments.len() { hi } else { walls[k] };
        if right > left {
            out.push(Domain { left, right, orientation: s.orientation });
        }
    }
    PolingPattern::new(merge(out), pattern.length)
}

fn merge(segments: Vec<Domain>) -> Vec<Domain> {
    let mut out: Vec<Domain> = Vec::with_capacity(segments.len());
    for s in segments {
        match out.last_mut() {
            Some(last) if last.orientation == s.orientation && last.right == s.left => last.right = s.right,
            _ => out.push(s),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const UM: f64 = 1e-6;

    #[test]
    fn periodic_example() {
        let p = periodic_poling(10.0 * UM, 30.0 * UM, 0.5).unwrap();
        assert_eq!(p.domains().len(), 6);
        for (k, d) in p.domains().iter().enumerate() {
            assert!((d.width() - 5.0 * UM).abs() < 1e-18);
            assert_eq!(d.orientation, if k % 2 == 0 { 1 } else { -1 });
        }
        assert!(matches!(periodic_poling(40.0 * UM, 30.0 * UM, 0.5), Err(Error::InvalidPattern(_))));
    }

    #[test]
    fn first_harmonic_of_square_wave() {
        let period = 10.0 * UM;
        let length = 1000.0 * period;
        let k = 2.0 * PI / period;
        for duty in [0.5, 0.25] {
            let p = periodic_poling(period, length, duty).unwrap();
            let c = p.fourier(k).norm() / length;
            let expected = (PI * duty).sin() * 2.0 / PI;
            assert!((c - expected).abs() < 1e-3, "duty {duty}: {c} vs {expected}");
        }
    }

    #[test]
    fn quasi_phase_matching_identity() {
        let period = 7.3 * UM;
        let length = 150.0 * period;
        let p = periodic_poling(period, length, 0.5).unwrap();
        let value = p.fourier(2.0 * PI / period).norm();
        assert!((value / (2.0 / PI * length) - 1.0).abs() < 0.01);
    }

    #[test]
    fn sampling_conventions() {
        let p = PolingPattern::new(
            vec![
                Domain { left: 0.0, right: 5.0 * UM, orientation: 1 },
                Domain { left: 5.0 * UM, right: 10.0 * UM, orientation: -1 },
            ],
            20.0 * UM,
        )
        .unwrap();
        assert_eq!(p.sample_g(7.0 * UM).unwrap(), -1);
        assert_eq!(p.sample_g(5.0 * UM).unwrap(), -1);
        assert_eq!(p.sample_g(10.0 * UM).unwrap(), 1);
        assert_eq!(p.sample_g(15.0 * UM).unwrap(), 1);
        assert_eq!(p.sample_h(15.0 * UM).unwrap(), 1);
        assert!(matches!(p.sample_g(21.0 * UM), Err(Error::OutOfRange { .. })));
        assert!(matches!(p.sample_g(-1e-9), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn constant_target_gives_periodic_pattern() {
        let period = 10.0 * UM;
        let length = 100.0 * period;
        let a = apodized_poling(|_| 1.0, period, length).unwrap();
        let p = periodic_poling(period, length, 0.5).unwrap();
        assert_eq!(a.domains().len(), p.domains().len());
        for (x, y) in a.domains().iter().zip(p.domains()) {
            assert_eq!(x.orientation, y.orientation);
            assert!((x.left - y.left).abs() < 1e-15 && (x.right - y.right).abs() < 1e-15);
        }
    }

    #[test]
    fn infeasible_target() {
        assert!(matches!(
            apodized_poling(|_| 1.5, 10.0 * UM, 1000.0 * UM),
            Err(Error::InfeasibleApodization { .. })
        ));
        assert!(matches!(apodized_poling(|_| -0.1, 10.0 * UM, 1000.0 * UM), Err(Error::InvalidPattern(_))));
    }

    #[test]
    fn gaussian_apodization_matches_target_spectrum() {
        let period = 10.0 * UM;
        let length = 500.0 * period; // 1000 cells of half a period
        let w = length / 6.0;
        let target = |z: f64| (-(z - length / 2.0).powi(2) / (2.0 * w * w)).exp();
        let p = apodized_poling(target, period, length).unwrap();
        let k0 = 2.0 * PI / period;
        // Phase-matching function of the ideal apodized grating: (2/π)∫A e^{iΔz}.
        let ideal = |delta: f64| -> Complex64 {
            let n = 4000;
            let h = length / n as f64;
            (0..=n)
                .map(|j| {
                    let z = j as f64 * h;
                    let wt = if j == 0 || j == n { 0.5 } else { 1.0 };
                    Complex64::from_polar(target(z) * wt * h, delta * z)
                })
                .sum::<Complex64>()
                * (2.0 / PI)
        };
        let peak = ideal(0.0).norm();
        let mut worst: f64 = 0.0;
        for j in -60..=60 {
            let delta = j as f64 * 4.0 / w / 60.0 * 3.0;
            let realized = p.fourier(k0 + delta).norm();
            worst = worst.max((realized - ideal(delta).norm()).abs());
        }
        assert!(worst <= 0.05 * peak, "L∞ deviation {} of peak", worst / peak);
    }

    #[test]
    fn zero_errors_are_identity() {
        let p = periodic_poling(10.0 * UM, 1000.0 * UM, 0.5).unwrap();
        let e = DomainErrorModel { shift: 0.0, missing_probability: 0.0, seed: 3 };
        assert_eq!(inject_domain_errors(&p, &e).unwrap(), p);
    }

    #[test]
    fn total_erasure() {
        let p = periodic_poling(10.0 * UM, 1000.0 * UM, 0.5).unwrap();
        let e = DomainErrorModel { shift: 0.0, missing_probability: 1.0, seed: 3 };
        let q = inject_domain_errors(&p, &e).unwrap();
        assert_eq!(q.inverted_count(), 0);
        for k in 0..1000 {
            assert_eq!(q.sample_g(k as f64 * UM).unwrap(), 1);
        }
    }

    #[test]
    fn missing_count_is_binomial() {
        let p = periodic_poling(10.0 * UM, 10_000.0 * UM, 0.5).unwrap();
        assert_eq!(p.inverted_count(), 1000);
        let e = DomainErrorModel { shift: 0.0, missing_probability: 0.3, seed: 12345 };
        let q = inject_domain_errors(&p, &e).unwrap();
        let reverted = 1000 - q.inverted_count() as i64;
        let sd = (1000.0f64 * 0.3 * 0.7).sqrt();
        assert!(((reverted as f64) - 300.0).abs() <= 2.576 * sd, "{reverted}");
        assert_eq!(inject_domain_errors(&p, &e).unwrap(), q);
    }

    #[test]
    fn over_broadening_rejected() {
        let p = periodic_poling(10.0 * UM, 100.0 * UM, 0.5).unwrap();
        let e = DomainErrorModel { shift: 5.0 * UM, missing_probability: 0.0, seed: 0 };
        assert!(matches!(inject_domain_errors(&p, &e), Err(Error::OverBroadening { .. })));
    }

    #[test]
    fn broadening_changes_duty_cycle() {
        let period = 10.0 * UM;
        let p = periodic_poling(period, 100.0 * period, 0.5).unwrap();
        let e = DomainErrorModel { shift: 1.0 * UM, missing_probability: 0.0, seed: 0 };
        let q = inject_domain_errors(&p, &e).unwrap();
        let inner: Vec<&Domain> = q.domains().iter().filter(|d| d.orientation == -1).collect();
        assert!((inner[3].width() - 7.0 * UM).abs() < 1e-15);
    }

    #[test]
    fn broadening_narrowing_symmetry() {
        let period = 10.0 * UM;
        let length = 400.0 * period;
        let p = periodic_poling(period, length, 0.5).unwrap();
        let k = 2.0 * PI / period;
        for delta in [0.3 * UM, 1.0 * UM, 2.0 * UM] {
            let wide = inject_domain_errors(&p, &DomainErrorModel { shift: delta, missing_probability: 0.0, seed: 1 }).unwrap();
            let narrow = inject_domain_errors(&p, &DomainErrorModel { shift: -delta, missing_probability: 0.0, seed: 1 }).unwrap();
            let (a, b) = (wide.fourier(k).norm(), narrow.fourier(k).norm());
            assert!((a / b - 1.0).abs() < 1e-3, "{delta}: {a} {b}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("qtwm-poling-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.csv");
        let p = apodized_poling(|z| 0.5 + 0.4 * (z * 1e4).sin(), 9.1 * UM, 800.0 * UM).unwrap();
        p.write_csv(&path).unwrap();
        let q = PolingPattern::read_csv(&path, p.length()).unwrap();
        assert_eq!(p, q);
        std::fs::remove_dir_all(dir).ok();
    }

    proptest! {
        #[test]
        fn injected_patterns_stay_valid(
            shift_frac in -0.45f64..0.45,
            p in 0.0f64..1.0,
            seed in any::<u64>(),
            duty in 0.2f64..0.8,
        ) {
            let period = 10.0 * UM;
            let pattern = periodic_poling(period, 60.0 * period, duty).unwrap();
            let shift = shift_frac * pattern.min_domain_width();
            let e = DomainErrorModel { shift, missing_probability: p, seed };
            let q = inject_domain_errors(&pattern, &e).unwrap();
            prop_assert!(q.inverted_count() <= pattern.inverted_count());
            prop_assert_eq!(inject_domain_errors(&pattern, &e).unwrap(), q.clone());
            for d in q.domains() {
                prop_assert!(d.width() > 0.0);
            }
            for j in 0..600 {
                let g = q.sample_g(j as f64 * period / 10.0).unwrap();
                prop_assert!(g == 1 || g == -1);
            }
        }
    }
}
