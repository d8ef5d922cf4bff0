//! Synthetic mill dataset with a known ground-truth response.
//!
//! Twenty input channels mirror a semi-autogenous grinding circuit: mill
//! state, feeder ratios, pebble-crusher statuses, inlet water, particle-size
//! fractions of the feed, and the feed's 80th-percentile size. The target is
//! mill throughput in t/h.
//!
//! The response surface is deterministic and documented here so tests can
//! check models and optimizers against an exact answer:
//!
//! * fifteen channels carry signal through smooth unimodal "sweet spot"
//!   terms `exp(-(u - m)^2 / (2 s^2))` or saturating terms `tanh(4 u)`,
//!   where `u` is the channel scaled to `[0, 1]`;
//! * three pairwise products couple power with turning speed, mill weight
//!   with inlet water, and crusher status with fine feed;
//! * five channels (indices [`INERT_FEATURES`]) contribute nothing and are
//!   drawn from a narrow band, mimicking sparse, low-variance plant tags.
//!
//! Every term is non-negative and peaks at a unique scaled coordinate, and
//! interaction factors peak at the same coordinates as their main effects,
//! so the global maximizer is known coordinate-wise: [`true_argmax`] and
//! [`true_max_value`] expose it. Gaussian noise of caller-chosen standard
//! deviation is added on top; with `noise_std = 0` targets equal
//! [`ground_truth`] exactly.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, FeatureSpec, Schema};
use crate::error::{Error, Result};
use crate::seeding::{name_tag, rng_from};

/// Name, unit, lower bound, upper bound of the 20 input channels.
pub const MILL_FEATURES: [(&str, &str, f64, f64); 20] = [
    ("Mill weight", "t", 440.14, 744.59),
    ("Mill power draw", "kW", 0.01, 14424.22),
    ("Mill turning speed", "rpm", 0.00, 10.31),
    ("Inlet water", "m3/h", 7.40, 482.86),
    ("Feeder 1 ratio", "-", 0.10, 1.00),
    ("Feeder 2 ratio", "-", 0.50, 1.70),
    ("Feeder 3 ratio", "-", 0.05, 1.00),
    ("Pebble crusher 1 working status", "-", 0.0, 2.0),
    ("Pebble crusher 2 working status", "-", 0.0, 2.0),
    ("%PL 13.2mm", "%", 5.30, 99.30),
    ("%PL 13.2-19mm", "%", 0.00, 82.70),
    ("%PL 19-26.5mm", "%", 0.00, 25.00),
    ("%PL 26.5-37.5mm", "%", 0.00, 34.00),
    ("%PL 37.5-53mm", "%", 0.00, 16.00),
    ("%PL 53-75mm", "%", 0.00, 24.00),
    ("%PL 75-106mm", "%", 0.00, 71.00),
    ("%PL 106-150mm", "%", 0.00, 35.00),
    ("%PL 150-212mm", "%", 0.00, 5.00),
    ("%PL 212-300mm", "%", 0.00, 1.00),
    ("P80", "mm", 4.00, 100.00),
];

/// Name, unit, and plausible range of the target channel.
pub const MILL_TARGET: (&str, &str, f64, f64) = ("Mill throughput", "t/h", 0.00, 1616.99);

/// Indices of the five channels that do not influence the response.
pub const INERT_FEATURES: [usize; 5] = [8, 10, 14, 17, 18];

/// Baseline throughput before any term contributes.
const BASE_THROUGHPUT: f64 = 700.0;

/// Steepness of the saturating terms.
const SAT_STEEPNESS: f64 = 4.0;

/// Inert channels sit at 10% of range with a ±2.5%-of-range uniform band.
const INERT_BAND_CENTER: f64 = 0.10;
const INERT_BAND_HALF_WIDTH: f64 = 0.025;

#[derive(Clone, Copy)]
enum Term {
    /// `w * exp(-(u - m)^2 / (2 s^2))`, peaking at `u = m`.
    Bump { m: f64, s: f64 },
    /// `w * tanh(4 u)`, saturating towards `u = 1`.
    Saturation,
}

/// Main effects: (feature index, weight, shape).
const MAIN_EFFECTS: [(usize, f64, Term); 15] = [
    (0, 90.0, Term::Bump { m: 0.65, s: 0.22 }),
    (1, 60.0, Term::Saturation),
    (2, 70.0, Term::Bump { m: 0.80, s: 0.18 }),
    (3, 60.0, Term::Bump { m: 0.55, s: 0.25 }),
    (4, 35.0, Term::Bump { m: 0.40, s: 0.25 }),
    (5, 35.0, Term::Bump { m: 0.60, s: 0.25 }),
    (6, 30.0, Term::Bump { m: 0.50, s: 0.25 }),
    (7, 20.0, Term::Saturation),
    (9, 45.0, Term::Bump { m: 0.30, s: 0.22 }),
    (11, 30.0, Term::Bump { m: 0.45, s: 0.25 }),
    (12, 30.0, Term::Bump { m: 0.55, s: 0.25 }),
    (13, 28.0, Term::Bump { m: 0.50, s: 0.25 }),
    (15, 30.0, Term::Bump { m: 0.35, s: 0.25 }),
    (16, 28.0, Term::Bump { m: 0.60, s: 0.25 }),
    (19, 50.0, Term::Bump { m: 0.25, s: 0.22 }),
];

/// Interactions: (first main-effect index, second main-effect index, weight),
/// referring to positions in [`MAIN_EFFECTS`].
const INTERACTIONS: [(usize, usize, f64); 3] = [(1, 2, 90.0), (0, 3, 60.0), (7, 9, 45.0)];

/// The schema of the synthetic dataset (20 features plus throughput target).
pub fn mill_schema() -> Schema {
    let features = MILL_FEATURES
        .iter()
        .map(|&(name, unit, lo, hi)| FeatureSpec::new(name, unit, lo, hi))
        .collect();
    let (name, unit, lo, hi) = MILL_TARGET;
    Schema::new(features, FeatureSpec::new(name, unit, lo, hi))
}

fn scale_to_unit(row: &[f64]) -> [f64; 20] {
    let mut u = [0.0f64; 20];
    for (j, slot) in u.iter_mut().enumerate() {
        let (_, _, lo, hi) = MILL_FEATURES[j];
        *slot = (row[j] - lo) / (hi - lo);
    }
    u
}

fn term_value(term: Term, u: f64) -> f64 {
    match term {
        Term::Bump { m, s } => (-(u - m) * (u - m) / (2.0 * s * s)).exp(),
        Term::Saturation => (SAT_STEEPNESS * u).tanh(),
    }
}

/// Noise-free throughput for one 20-channel row.
pub fn ground_truth(row: &[f64]) -> f64 {
    assert_eq!(row.len(), 20, "mill rows have 20 channels");
    let u = scale_to_unit(row);
    let mut g = [0.0f64; 15];
    let mut y = BASE_THROUGHPUT;
    for (t, &(idx, w, term)) in MAIN_EFFECTS.iter().enumerate() {
        g[t] = term_value(term, u[idx]);
        y += w * g[t];
    }
    for &(a, b, w) in &INTERACTIONS {
        y += w * g[a] * g[b];
    }
    y
}

/// The unique input maximizing [`ground_truth`] over the channel bounds.
///
/// Inert channels do not affect the response; they are reported at the
/// centre of their generation band.
pub fn true_argmax() -> Vec<f64> {
    let mut row: Vec<f64> = MILL_FEATURES
        .iter()
        .map(|&(_, _, lo, hi)| lo + INERT_BAND_CENTER * (hi - lo))
        .collect();
    for &(idx, _, term) in &MAIN_EFFECTS {
        let (_, _, lo, hi) = MILL_FEATURES[idx];
        let u_star = match term {
            Term::Bump { m, .. } => m,
            Term::Saturation => 1.0,
        };
        row[idx] = lo + u_star * (hi - lo);
    }
    row
}

/// The global maximum of [`ground_truth`] over the channel bounds.
pub fn true_max_value() -> f64 {
    ground_truth(&true_argmax())
}

/// Generate `n` rows with seeded uniform inputs and Gaussian target noise.
///
/// Per row, the 20 channels are drawn left to right — signal channels
/// uniformly over their full range, inert channels uniformly over their
/// narrow band — followed by one noise draw when `noise_std > 0`.
pub fn generate_synthetic_mill(n: usize, seed: u64, noise_std: f64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyInput {
            context: "generate_synthetic_mill".into(),
        });
    }
    if !noise_std.is_finite() || noise_std < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise_std must be finite and non-negative, got {noise_std}"
        )));
    }
    let mut rng = rng_from(seed, &[name_tag("synthetic_mill")]);
    let noise = if noise_std > 0.0 {
        Some(Normal::new(0.0, noise_std).expect("validated std"))
    } else {
        None
    };

    let mut rows = Array2::zeros((n, 20));
    let mut target = Array1::zeros(n);
    let mut row_buf = [0.0f64; 20];
    for i in 0..n {
        for (j, slot) in row_buf.iter_mut().enumerate() {
            let (_, _, lo, hi) = MILL_FEATURES[j];
            let u: f64 = rng.gen();
            *slot = if INERT_FEATURES.contains(&j) {
                let center = lo + INERT_BAND_CENTER * (hi - lo);
                let half = INERT_BAND_HALF_WIDTH * (hi - lo);
                (center - half) + u * (2.0 * half)
            } else {
                lo + u * (hi - lo)
            };
        }
        rows.row_mut(i)
            .assign(&ndarray::ArrayView1::from(&row_buf[..]));
        let mut y = ground_truth(&row_buf);
        if let Some(dist) = &noise {
            y += dist.sample(&mut rng);
        }
        target[i] = y;
    }
    Dataset::new(mill_schema(), rows, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_respect_declared_bounds() {
        let data = generate_synthetic_mill(500, 9, 30.0).unwrap();
        for j in 0..20 {
            let spec = &data.schema.features[j];
            for i in 0..data.n_rows() {
                assert!(
                    spec.contains(data.rows[[i, j]]),
                    "{} out of bounds at row {i}",
                    spec.name
                );
            }
        }
    }

    #[test]
    fn zero_noise_matches_ground_truth_exactly() {
        let data = generate_synthetic_mill(100, 3, 0.0).unwrap();
        for i in 0..data.n_rows() {
            let row: Vec<f64> = data.rows.row(i).to_vec();
            assert_eq!(data.target[i], ground_truth(&row));
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_synthetic_mill(50, 11, 5.0).unwrap();
        let b = generate_synthetic_mill(50, 11, 5.0).unwrap();
        let c = generate_synthetic_mill(50, 12, 5.0).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.target, b.target);
        assert_ne!(a.rows, c.rows);
    }

    #[test]
    fn inert_channels_have_narrow_spread() {
        let data = generate_synthetic_mill(400, 5, 0.0).unwrap();
        for &j in &INERT_FEATURES {
            let (_, _, lo, hi) = MILL_FEATURES[j];
            let col = data.rows.column(j);
            let span = col.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - col.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(
                span <= 2.0 * INERT_BAND_HALF_WIDTH * (hi - lo) + 1e-12,
                "inert channel {j} spread too wide"
            );
        }
    }

    #[test]
    fn argmax_dominates_random_probes() {
        let best = true_max_value();
        assert!(best < MILL_TARGET.3, "max must stay below target ceiling");
        let data = generate_synthetic_mill(2000, 17, 0.0).unwrap();
        for i in 0..data.n_rows() {
            assert!(data.target[i] <= best);
        }
        // Perturbing any signal coordinate away from the peak only hurts.
        let star = true_argmax();
        for &(idx, _, _) in &MAIN_EFFECTS {
            let (_, _, lo, hi) = MILL_FEATURES[idx];
            let mut probe = star.clone();
            probe[idx] = (star[idx] - 0.11 * (hi - lo)).max(lo);
            assert!(ground_truth(&probe) < best);
        }
    }

    #[test]
    fn invalid_requests_are_rejected() {
        assert!(generate_synthetic_mill(0, 1, 1.0).is_err());
        assert!(generate_synthetic_mill(10, 1, -1.0).is_err());
        assert!(generate_synthetic_mill(10, 1, f64::NAN).is_err());
    }
}
