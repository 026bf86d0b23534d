//! Synthetic mixed-variable benchmarks with known maxima.

use std::f64::consts::{E, PI};

use crate::error::EvalError;
use crate::space::{ContinuousVar, DiscreteVar, MixedSpace};

use super::{check_arity, KnownOptimum, Objective};

/// Shekel weights `c_i`, i = 1..10.
pub const SHEKEL_C: [f64; 10] = [0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5];

/// Shekel centres `a_ji`: row j is the coordinate, column i the term.
/// Rows 3 and 4 repeat rows 1 and 2.
pub const SHEKEL_A: [[f64; 10]; 4] = [
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
];

const SHEKEL_OPTIMUM: f64 = 10.536283726219603;

/// Ten-term Shekel function (a maximization benchmark).
///
/// The outer sum runs over all ten `(c_i, a_i)` pairs; with four terms the
/// stated maximum of about 10.5363 at (4,4,4,4) is not reproduced.
pub fn shekel(x1: f64, x2: f64, x3: f64, x4: f64) -> f64 {
    let x = [x1, x2, x3, x4];
    (0..10)
        .map(|i| {
            let sq: f64 = (0..4).map(|j| (x[j] - SHEKEL_A[j][i]).powi(2)).sum();
            1.0 / (SHEKEL_C[i] + sq)
        })
        .sum()
}

pub fn rastrigin(x: f64, y: f64) -> f64 {
    let term = |v: f64| v * v - 10.0 * (2.0 * PI * v).cos();
    20.0 + term(x) + term(y)
}

pub fn ackley(x: f64, y: f64) -> f64 {
    let a = -0.2 * (0.5 * (x * x + y * y)).sqrt();
    let b = 0.5 * ((2.0 * PI * x).cos() + (2.0 * PI * y).cos());
    // grouped so that the value at the origin is exactly zero
    (20.0 - 20.0 * a.exp()) + (E - b.exp())
}

pub fn sphere(x: f64, y: f64) -> f64 {
    x * x + y * y
}

/// Branch `u` selects Rastrigin (0), Ackley (1) or Sphere (2), negated and
/// offset so that the maxima are 0, 10 and 20.
pub fn composition(u: i64, x: f64, y: f64) -> Result<f64, EvalError> {
    match u {
        0 => Ok(-rastrigin(x, y)),
        1 => Ok(-ackley(x, y) + 10.0),
        2 => Ok(-sphere(x, y) + 20.0),
        _ => Err(EvalError::InvalidInput(format!("composition branch u must be 0, 1 or 2, got {u}"))),
    }
}

/// Domain shared by the three permutation arguments.
pub const PERM_DOMAIN: [f64; 5] = [1.0, 4.0, 7.0, 10.0, 13.0];
pub const PERM_U: [f64; 5] = [7.0, 1.0, 13.0, 10.0, 4.0];
pub const PERM_V: [f64; 5] = [13.0, 1.0, 4.0, 7.0, 10.0];
pub const PERM_W: [f64; 5] = [7.0, 4.0, 10.0, 1.0, 13.0];

/// Element following `value` in `cycle`, wrapping from the last to the first.
fn next_in_cycle(cycle: &[f64; 5], value: f64) -> Option<f64> {
    let pos = cycle.iter().position(|&c| c == value)?;
    Some(cycle[(pos + 1) % cycle.len()])
}

pub fn perm_u(value: f64) -> Option<f64> {
    next_in_cycle(&PERM_U, value)
}

pub fn perm_v(value: f64) -> Option<f64> {
    next_in_cycle(&PERM_V, value)
}

pub fn perm_w(value: f64) -> Option<f64> {
    next_in_cycle(&PERM_W, value)
}

pub fn sine_g(x: f64, y: f64) -> f64 {
    let dy = y - 4.0;
    let phase = (7.0 - x).powi(2) * PI / (2.0 * dy * dy + 1.0);
    x * phase.sin() / ((x - 5.0).powi(2) + 1.0)
}

pub fn sine_permutation(u: f64, v: f64, w: f64, x: f64, y: f64) -> Result<f64, EvalError> {
    let lookup = |name: &str, f: fn(f64) -> Option<f64>, val: f64| {
        f(val).ok_or_else(|| EvalError::InvalidInput(format!("{name} = {val} is not one of 1, 4, 7, 10, 13")))
    };
    let shift = lookup("u", perm_u, u)? + lookup("v", perm_v, v)? + lookup("w", perm_w, w)?;
    Ok(sine_g(shift + x, y))
}

/// Global maximum of the sine-permutation benchmark, located by exhaustive
/// search over all 125 permutation triples on a dense (x, y) grid followed
/// by local refinement. Attained at u = 7, v = 13, w = 10.
pub const SINE_PERMUTATION_OPTIMUM: f64 = 5.049509756796392;
const SINE_PERMUTATION_ARGMAX: [f64; 5] = [7.0, 13.0, 10.0, 2.099019513592785, 2.2354244675557205];

fn integer_var(name: &str, lo: i64, hi: i64) -> DiscreteVar {
    DiscreteVar::integers(name, lo, hi).expect("static domain")
}

fn continuous_var(name: &str, lo: f64, hi: f64) -> ContinuousVar {
    ContinuousVar::new(name, lo, hi).expect("static bounds")
}

fn in_space(space: &MixedSpace, discrete: &[f64], continuous: &[f64]) -> Result<(), EvalError> {
    check_arity(space, discrete, continuous)?;
    if !space.contains(discrete, continuous) {
        return Err(EvalError::InvalidInput(format!(
            "point {discrete:?} / {continuous:?} is outside the search region"
        )));
    }
    Ok(())
}

/// Shekel over {0..10} x {0..10} x [0,10] x [0,10].
pub struct Shekel {
    space: MixedSpace,
    optimum: KnownOptimum,
}

impl Shekel {
    pub fn new() -> Self {
        let space = MixedSpace::new(
            vec![integer_var("x1", 0, 10), integer_var("x2", 0, 10)],
            vec![continuous_var("x3", 0.0, 10.0), continuous_var("x4", 0.0, 10.0)],
        )
        .expect("static space");
        Self {
            space,
            optimum: KnownOptimum {
                value: SHEKEL_OPTIMUM,
                discrete: vec![4.0, 4.0],
                continuous: vec![4.0, 4.0],
            },
        }
    }
}

impl Default for Shekel {
    fn default() -> Self {
        Self::new()
    }
}

impl Objective for Shekel {
    fn name(&self) -> &str {
        "shekel"
    }

    fn space(&self) -> &MixedSpace {
        &self.space
    }

    fn evaluate(&self, d: &[f64], c: &[f64]) -> Result<f64, EvalError> {
        in_space(&self.space, d, c)?;
        Ok(shekel(d[0], d[1], c[0], c[1]))
    }

    fn known_optimum(&self) -> Option<&KnownOptimum> {
        Some(&self.optimum)
    }
}

/// Composition over {0,1,2} x {-1..3} x [-5,5].
pub struct Composition {
    space: MixedSpace,
    optimum: KnownOptimum,
}

impl Composition {
    pub fn new() -> Self {
        let space = MixedSpace::new(
            vec![integer_var("u", 0, 2), integer_var("x", -1, 3)],
            vec![continuous_var("y", -5.0, 5.0)],
        )
        .expect("static space");
        Self {
            space,
            optimum: KnownOptimum {
                value: 20.0,
                discrete: vec![2.0, 0.0],
                continuous: vec![0.0],
            },
        }
    }
}

impl Default for Composition {
    fn default() -> Self {
        Self::new()
    }
}

impl Objective for Composition {
    fn name(&self) -> &str {
        "composition"
    }

    fn space(&self) -> &MixedSpace {
        &self.space
    }

    fn evaluate(&self, d: &[f64], c: &[f64]) -> Result<f64, EvalError> {
        in_space(&self.space, d, c)?;
        composition(d[0] as i64, d[1], c[0])
    }

    fn known_optimum(&self) -> Option<&KnownOptimum> {
        Some(&self.optimum)
    }
}

/// Sine-permutation over {1,4,7,10,13}^3 x [0.5,8] x [0.1,5].
pub struct SinePermutation {
    space: MixedSpace,
    optimum: KnownOptimum,
}

impl SinePermutation {
    pub fn new() -> Self {
        let perm_var = |name: &str| DiscreteVar::new(name, PERM_DOMAIN.to_vec()).expect("static domain");
        let space = MixedSpace::new(
            vec![perm_var("u"), perm_var("v"), perm_var("w")],
            vec![continuous_var("x", 0.5, 8.0), continuous_var("y", 0.1, 5.0)],
        )
        .expect("static space");
        Self {
            space,
            optimum: KnownOptimum {
                value: SINE_PERMUTATION_OPTIMUM,
                discrete: SINE_PERMUTATION_ARGMAX[..3].to_vec(),
                continuous: SINE_PERMUTATION_ARGMAX[3..].to_vec(),
            },
        }
    }
}

impl Default for SinePermutation {
    fn default() -> Self {
        Self::new()
    }
}

impl Objective for SinePermutation {
    fn name(&self) -> &str {
        "sine_permutation"
    }

    fn space(&self) -> &MixedSpace {
        &self.space
    }

    fn evaluate(&self, d: &[f64], c: &[f64]) -> Result<f64, EvalError> {
        in_space(&self.space, d, c)?;
        sine_permutation(d[0], d[1], d[2], c[0], c[1])
    }

    fn known_optimum(&self) -> Option<&KnownOptimum> {
        Some(&self.optimum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shekel_known_values() {
        assert!((shekel(4.0, 4.0, 4.0, 4.0) - 10.536283726219603).abs() < 1e-9);
        // 40-digit evaluation of the ten-term sum: 5.128471039662403346933...
        assert!((shekel(1.0, 1.0, 1.0, 1.0) - 5.128471039662403).abs() < 1e-12);
    }

    #[test]
    fn shekel_swap_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..10.0));
            let a = shekel(p[0], p[1], p[2], p[3]);
            let b = shekel(p[2], p[3], p[0], p[1]);
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn composition_branches() {
        assert_eq!(composition(2, 0.0, 0.0).unwrap(), 20.0);
        assert_eq!(composition(0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(composition(1, 0.0, 0.0).unwrap(), 10.0);
        assert!(composition(3, 0.0, 0.0).is_err());
        assert!(composition(-1, 0.0, 0.0).is_err());
    }

    #[test]
    fn permutations() {
        assert_eq!(perm_u(1.0), Some(13.0));
        assert_eq!(perm_u(4.0), Some(7.0));
        assert_eq!(perm_v(10.0), Some(13.0));
        assert_eq!(perm_w(13.0), Some(7.0));
        assert_eq!(perm_u(2.0), None);
        for f in [perm_u, perm_v, perm_w] {
            let mut image: Vec<f64> = PERM_DOMAIN.iter().map(|&d| f(d).unwrap()).collect();
            image.sort_by(f64::total_cmp);
            assert_eq!(image, PERM_DOMAIN);
            for &d in &PERM_DOMAIN {
                let mut v = d;
                for _ in 0..5 {
                    v = f(v).unwrap();
                }
                assert_eq!(v, d);
            }
        }
    }

    #[test]
    fn sine_g_zero_at_integer_phase() {
        assert!(sine_g(5.0, 4.0).abs() < 1e-12);
        assert!(sine_permutation(2.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn stated_optima_are_attained() {
        for name in super::super::SYNTHETIC_NAMES {
            let f = super::super::synthetic(name).unwrap();
            let opt = f.known_optimum().unwrap();
            let v = f.evaluate(&opt.discrete, &opt.continuous).unwrap();
            assert!((v - opt.value).abs() < 1e-9, "{name}: {v} vs {}", opt.value);
        }
    }

    #[test]
    fn out_of_region_is_rejected() {
        let f = Composition::new();
        assert!(f.evaluate(&[2.0, 0.0], &[5.5]).is_err());
        assert!(f.evaluate(&[2.0, 0.5], &[0.0]).is_err());
        assert!(f.evaluate(&[2.0], &[0.0]).is_err());
    }
}
