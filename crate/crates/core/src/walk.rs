//! Discrete-time quantum walk on a line: walker state, coin operators, and
//! one step of coin-then-shift unitary evolution.
//!
//! The walker lives on integer positions `x ∈ [-T, T]` with a two-dimensional
//! internal coin space. One evolution step applies a (possibly
//! position-dependent) 2×2 coin at every site, then shifts the coin-0
//! amplitude one site left and the coin-1 amplitude one site right. Starting
//! from `|x=0, coin 0⟩`, amplitudes stay inside the light cone `|x| ≤ t` and
//! on the parity sublattice `x ≡ t (mod 2)`; the implementation never writes
//! outside either, so those zeros are exact.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("coin angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("step {next} would push the light cone past the lattice half-width {half_width}")]
    Capacity { next: usize, half_width: usize },
    #[error("coin row covers {got} sites but the lattice has {expected}")]
    CoinRowLength { got: usize, expected: usize },
    #[error("probabilities must be finite and nonnegative (bad value {value} at x = {x})")]
    BadProbability { x: i64, value: f64 },
    #[error("distribution sums to {sum}, expected 1 within {tol}")]
    Unnormalized { sum: f64, tol: f64 },
}

/// A symmetric 2×2 unitary coin `[[cos θ, -i sin θ], [-i sin θ, cos θ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOperator {
    theta: f64,
    entries: [[Complex64; 2]; 2],
}

impl CoinOperator {
    /// Build the coin for a given rotation angle.
    pub fn new(theta: f64) -> Result<Self, WalkError> {
        if !theta.is_finite() {
            return Err(WalkError::NonFiniteAngle(theta));
        }
        let c = Complex64::new(theta.cos(), 0.0);
        let s = Complex64::new(0.0, -theta.sin());
        Ok(CoinOperator {
            theta,
            entries: [[c, s], [s, c]],
        })
    }

    /// The EOM rotation by `phi` followed by a quarter-wave plate at 45°.
    ///
    /// The product collapses to a single symmetric coin with `θ = φ + π/4`.
    pub fn compose_eom_qwp(phi: f64) -> Result<Self, WalkError> {
        if !phi.is_finite() {
            return Err(WalkError::NonFiniteAngle(phi));
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let qwp = [
            [
                Complex64::new(inv_sqrt2, 0.0),
                Complex64::new(0.0, -inv_sqrt2),
            ],
            [
                Complex64::new(0.0, -inv_sqrt2),
                Complex64::new(inv_sqrt2, 0.0),
            ],
        ];
        let eom = CoinOperator::new(phi)?.entries;
        let mut entries = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = eom[i][0] * qwp[0][j] + eom[i][1] * qwp[1][j];
            }
        }
        Ok(CoinOperator {
            theta: phi + std::f64::consts::FRAC_PI_4,
            entries,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    /// Apply the coin to a single (coin-0, coin-1) amplitude pair.
    #[inline]
    fn apply(&self, pair: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.entries[0][0] * pair[0] + self.entries[0][1] * pair[1],
            self.entries[1][0] * pair[0] + self.entries[1][1] * pair[1],
        ]
    }

    /// Maximum entrywise deviation from `other` after removing a global phase.
    ///
    /// The phase reference is the entry of `self` with the largest magnitude;
    /// physical predictions are invariant under this alignment.
    pub fn phase_insensitive_distance(&self, other: &CoinOperator) -> f64 {
        let (mut ri, mut rj, mut best) = (0, 0, 0.0f64);
        for i in 0..2 {
            for j in 0..2 {
                let m = self.entries[i][j].norm();
                if m > best {
                    best = m;
                    ri = i;
                    rj = j;
                }
            }
        }
        let phase = if other.entries[ri][rj].norm() > 0.0 && best > 0.0 {
            (self.entries[ri][rj] / best)
                * (other.entries[ri][rj] / other.entries[ri][rj].norm()).conj()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut dist = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                dist = dist.max((self.entries[i][j] - phase * other.entries[i][j]).norm());
            }
        }
        dist
    }
}

/// The walker's complex amplitude field over `(position, coin)` at a step.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    step: usize,
    half_width: usize,
    /// (coin-0, coin-1) amplitudes per site, index `i` ↔ position `i - T`.
    amplitudes: Vec<[Complex64; 2]>,
}

impl WalkerState {
    /// Walker at `|x = 0, coin 0⟩` on a lattice spanning `[-half_width, half_width]`.
    pub fn new(half_width: usize) -> Self {
        let mut amplitudes = vec![[Complex64::new(0.0, 0.0); 2]; 2 * half_width + 1];
        amplitudes[half_width][0] = Complex64::new(1.0, 0.0);
        WalkerState {
            step: 0,
            half_width,
            amplitudes,
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn num_sites(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitude pair `(ψ₀, ψ₁)` at position `x`.
    pub fn amplitude(&self, x: i64) -> [Complex64; 2] {
        self.amplitudes[(x + self.half_width as i64) as usize]
    }

    /// Total probability `Σₓ (|ψ₀|² + |ψ₁|²)`.
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .sum()
    }

    /// Advance one step: coin at every site, then the coin-conditioned shift.
    ///
    /// `coins` covers the full lattice, index `i` ↔ position `i - T`; entries
    /// outside the light cone are ignored. Fresh amplitudes are written only
    /// inside the new cone, so out-of-cone and off-parity zeros stay exact.
    pub fn step(&mut self, coins: &[CoinOperator]) -> Result<(), WalkError> {
        let n = self.amplitudes.len();
        if coins.len() != n {
            return Err(WalkError::CoinRowLength {
                got: coins.len(),
                expected: n,
            });
        }
        let next = self.step + 1;
        if next > self.half_width {
            return Err(WalkError::Capacity {
                next,
                half_width: self.half_width,
            });
        }
        let t = self.half_width as i64;
        let mut out = vec![[Complex64::new(0.0, 0.0); 2]; n];
        // light cone at the current step: |x| ≤ step with x ≡ step (mod 2)
        let lo = -(self.step as i64);
        let hi = self.step as i64;
        for x in (lo..=hi).step_by(2) {
            let i = (x + t) as usize;
            let tossed = coins[i].apply(self.amplitudes[i]);
            out[i - 1][0] += tossed[0];
            out[i + 1][1] += tossed[1];
        }
        self.amplitudes = out;
        self.step = next;
        Ok(())
    }

    /// Run `count` steps with the same coin at every site and step.
    pub fn run_uniform(&mut self, coin: CoinOperator, count: usize) -> Result<(), WalkError> {
        let coins = vec![coin; self.num_sites()];
        for _ in 0..count {
            self.step(&coins)?;
        }
        Ok(())
    }

    /// Position distribution, tracing over the coin; optionally coin-resolved.
    pub fn probability_distribution(&self, coin_resolved: bool) -> Distribution {
        let probs: Vec<f64> = self
            .amplitudes
            .iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .collect();
        let coin_probs = coin_resolved.then(|| {
            self.amplitudes
                .iter()
                .map(|a| [a[0].norm_sqr(), a[1].norm_sqr()])
                .collect()
        });
        Distribution {
            half_width: self.half_width,
            probs,
            coin_probs,
        }
    }
}

/// Probabilities per position on `[-T, T]`, optionally split by coin state.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    half_width: usize,
    probs: Vec<f64>,
    coin_probs: Option<Vec<[f64; 2]>>,
}

impl Distribution {
    /// Wrap raw per-position probabilities (index `i` ↔ position `i - T`).
    ///
    /// Entries must be finite and nonnegative and sum to 1 within `1e-6`;
    /// moment routines rely on that bound.
    pub fn from_probs(half_width: usize, probs: Vec<f64>) -> Result<Self, WalkError> {
        assert_eq!(probs.len(), 2 * half_width + 1, "probability vector length");
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(WalkError::BadProbability {
                    x: i as i64 - half_width as i64,
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(WalkError::Unnormalized { sum, tol: 1e-6 });
        }
        Ok(Distribution {
            half_width,
            probs,
            coin_probs: None,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Probability at position `x` (zero outside the lattice).
    pub fn prob(&self, x: i64) -> f64 {
        let i = x + self.half_width as i64;
        if i < 0 || i as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Coin-resolved probabilities, if requested at construction.
    pub fn coin_probs(&self) -> Option<&[[f64; 2]]> {
        self.coin_probs.as_deref()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Restrict to the window `|x| ≤ x_max` and renormalize, keeping the
    /// lattice size. Coin-resolved entries, if present, are rescaled by the
    /// same factor so they still sum to the marginal.
    pub fn restricted(&self, x_max: i64) -> Result<Distribution, WalkError> {
        let t = self.half_width as i64;
        let mass: f64 = self
            .iter()
            .filter(|&(x, _)| x.abs() <= x_max)
            .map(|(_, p)| p)
            .sum();
        if mass <= 0.0 || !mass.is_finite() {
            return Err(WalkError::Unnormalized {
                sum: mass,
                tol: 1e-6,
            });
        }
        let keep = |x: i64| x.abs() <= x_max;
        let probs = self
            .iter()
            .map(|(x, p)| if keep(x) { p / mass } else { 0.0 })
            .collect();
        let coin_probs = self.coin_probs.as_ref().map(|pairs| {
            pairs
                .iter()
                .enumerate()
                .map(|(i, pair)| {
                    if keep(i as i64 - t) {
                        [pair[0] / mass, pair[1] / mass]
                    } else {
                        [0.0, 0.0]
                    }
                })
                .collect()
        });
        Ok(Distribution {
            half_width: self.half_width,
            probs,
            coin_probs,
        })
    }

    /// Iterate `(x, P(x))` over the lattice.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let t = self.half_width as i64;
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (i as i64 - t, p))
    }
}
