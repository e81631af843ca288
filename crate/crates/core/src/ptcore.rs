//! Exact two-level PT-symmetric dynamics in dimensionless units.
//!
//! The target Hamiltonian `h = [[-iΓ, Λ], [Λ, iΓ]]` is rescaled by its level splitting
//! `α = 2√(Λ² − Γ²)`, so time is `τ = αt`, the coupling is `λ = 2Λ/α` and the gain is
//! `γ = 2Γ/α`. In these units `λ² − γ² = 1` and the wavefunction obeys
//!
//! ```text
//! i dψ/dτ = ½ (λσx − iγσz) ψ
//! ```
//!
//! whose propagator has the closed form `U(τ) = cos(τ/2)·I − sin(τ/2)·(γσz + iλσx)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense 2×2 complex matrix, row-major.
pub type Mat2<T> = [[Complex<T>; 2]; 2];

pub fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_det<T: Real>(a: &Mat2<T>) -> Complex<T> {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn mat2_apply<T: Real>(a: &Mat2<T>, v: &[Complex<T>; 2]) -> [Complex<T>; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Dimensionless parameters of the PT-symmetric dimer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtParams<T> {
    gamma: T,
    lambda: T,
    alpha: Option<T>,
    gamma_ratio: T,
}

impl<T: Real> PtParams<T> {
    /// Builds parameters from the ratio `g = γ/λ ∈ [0, 1)`.
    pub fn from_ratio(gamma_ratio: T) -> Result<Self> {
        if !(gamma_ratio >= T::zero()) || !gamma_ratio.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma_ratio",
                value: gamma_ratio.to_f64_lossy(),
                reason: "must be finite and non-negative",
            });
        }
        if gamma_ratio >= T::one() {
            return Err(Error::BrokenPhase {
                gain: gamma_ratio.to_f64_lossy(),
                coupling: 1.0,
            });
        }
        let lambda = T::one() / (T::one() - gamma_ratio * gamma_ratio).sqrt();
        Ok(Self {
            gamma: gamma_ratio * lambda,
            lambda,
            alpha: None,
            gamma_ratio,
        })
    }

    /// Rescales a physical gain `Γ` and coupling `Λ` by the level splitting.
    pub fn nondimensionalize(gain: T, coupling: T) -> Result<Self> {
        if !(coupling > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "coupling",
                value: coupling.to_f64_lossy(),
                reason: "must be positive",
            });
        }
        if !(gain >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "gain",
                value: gain.to_f64_lossy(),
                reason: "must be non-negative",
            });
        }
        if gain >= coupling {
            return Err(Error::BrokenPhase {
                gain: gain.to_f64_lossy(),
                coupling: coupling.to_f64_lossy(),
            });
        }
        let two = T::lit(2.0);
        let alpha = two * (coupling * coupling - gain * gain).sqrt();
        Ok(Self {
            gamma: two * gain / alpha,
            lambda: two * coupling / alpha,
            alpha: Some(alpha),
            gamma_ratio: gain / coupling,
        })
    }

    #[inline]
    pub fn gamma(&self) -> T {
        self.gamma
    }

    #[inline]
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Physical level splitting, present only when built from physical rates.
    #[inline]
    pub fn alpha(&self) -> Option<T> {
        self.alpha
    }

    #[inline]
    pub fn gamma_ratio(&self) -> T {
        self.gamma_ratio
    }

    /// The dimensionless generator `½(λσx − iγσz)`.
    pub fn generator(&self) -> Mat2<T> {
        let half = T::lit(0.5);
        let zero = T::zero();
        [
            [
                Complex::new(zero, -half * self.gamma),
                Complex::new(half * self.lambda, zero),
            ],
            [
                Complex::new(half * self.lambda, zero),
                Complex::new(zero, half * self.gamma),
            ],
        ]
    }

    pub fn propagator(&self, tau: T) -> Mat2<T> {
        let half = T::lit(0.5) * tau;
        let (s, c) = half.sin_cos();
        let zero = T::zero();
        let off = Complex::new(zero, -s * self.lambda);
        [
            [Complex::new(c - s * self.gamma, zero), off],
            [off, Complex::new(c + s * self.gamma, zero)],
        ]
    }

    /// Propagates the real initial state `(cos θ/2, sin θ/2)` to time `tau`.
    pub fn evolve(&self, theta: T, tau: T) -> PtState<T> {
        let [psi1, psi2] = mat2_apply(&self.propagator(tau), &initial_amplitudes(theta));
        PtState { psi1, psi2, tau }
    }

    /// `dψ/dτ = −(i/2)(λσx − iγσz)ψ` at the given state.
    pub fn derivative(&self, state: &PtState<T>) -> [Complex<T>; 2] {
        let half = T::lit(0.5);
        let neg_i = Complex::new(T::zero(), -T::one());
        let a = state.psi1 * Complex::new(T::zero(), -self.gamma) + state.psi2 * self.lambda;
        let b = state.psi1 * self.lambda + state.psi2 * Complex::new(T::zero(), self.gamma);
        [neg_i * a * half, neg_i * b * half]
    }

    /// Width of the sharp features in the relative phase, `(λγ/2)^{-1/2}`.
    pub fn tau_sharp(&self) -> Result<T> {
        if self.gamma <= T::zero() {
            return Err(Error::Undefined("tau_sharp"));
        }
        Ok((self.lambda * self.gamma * T::lit(0.5)).sqrt().recip())
    }
}

/// `(cos θ/2, sin θ/2)` as complex amplitudes.
pub fn initial_amplitudes<T: Real>(theta: T) -> [Complex<T>; 2] {
    let (s, c) = (T::lit(0.5) * theta).sin_cos();
    [Complex::new(c, T::zero()), Complex::new(s, T::zero())]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtState<T> {
    pub psi1: Complex<T>,
    pub psi2: Complex<T>,
    pub tau: T,
}

impl<T: Real> PtState<T> {
    pub fn norm(&self) -> T {
        self.psi1.norm_sqr() + self.psi2.norm_sqr()
    }

    pub fn magnetization(&self) -> T {
        self.psi1.norm_sqr() - self.psi2.norm_sqr()
    }

    /// Principal value of `arg ψ2 − arg ψ1` in `(−π, π]`.
    pub fn relative_phase(&self) -> Result<T> {
        let eps = T::lit(1e-14);
        if self.psi1.norm() < eps || self.psi2.norm() < eps {
            return Err(Error::PhaseUndefined {
                tau: self.tau.to_f64_lossy(),
            });
        }
        Ok((self.psi2 * self.psi1.conj()).arg())
    }

    /// Norm, magnetisation and principal-value phase. Use [`PhaseUnwrapper`] along a trajectory.
    pub fn observables(&self) -> Result<PtObservables<T>> {
        Ok(PtObservables {
            norm: self.norm(),
            magnetization: self.magnetization(),
            relative_phase: self.relative_phase()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtObservables<T> {
    pub norm: T,
    pub magnetization: T,
    pub relative_phase: T,
}

/// Removes `2π` jumps from a sequence of principal-value phases.
#[derive(Debug, Clone, Default)]
pub struct PhaseUnwrapper<T> {
    previous: Option<T>,
    offset: T,
}

impl<T: Real> PhaseUnwrapper<T> {
    pub fn new() -> Self {
        Self {
            previous: None,
            offset: T::zero(),
        }
    }

    pub fn unwrap(&mut self, principal: T) -> T {
        let two_pi = T::TAU();
        if let Some(prev) = self.previous {
            let jump = principal - prev;
            if jump > T::PI() {
                self.offset -= two_pi;
            } else if jump < -T::PI() {
                self.offset += two_pi;
            }
        }
        self.previous = Some(principal);
        principal + self.offset
    }
}

/// Observables on a sampled trajectory with the relative phase unwrapped by continuity.
pub fn observables_along<T: Real>(
    params: &PtParams<T>,
    theta: T,
    taus: &[T],
) -> Result<Vec<(PtState<T>, PtObservables<T>)>> {
    let mut unwrapper = PhaseUnwrapper::new();
    taus.iter()
        .map(|&tau| {
            let state = params.evolve(theta, tau);
            let mut obs = state.observables()?;
            obs.relative_phase = unwrapper.unwrap(obs.relative_phase);
            Ok((state, obs))
        })
        .collect()
}
