//! Fourier-collocation helpers on the uniform grid alpha_j = 2*pi*j/m.
//!
//! All routines act on real 2*pi-periodic samples. Spectra are stored in
//! rustfft layout: index i holds wavenumber i for i <= m/2 and i - m above.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Result, WaveError};

pub struct Spectral {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(WaveError::Config(format!(
                "grid size must be even and >= 4, got {m}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Signed wavenumber of spectrum slot `i`.
    pub fn signed_k(&self, i: usize) -> i64 {
        if i <= self.m / 2 {
            i as i64
        } else {
            i as i64 - self.m as i64
        }
    }

    /// Grid nodes alpha_j = 2*pi*j/m.
    pub fn nodes(&self) -> Vec<f64> {
        let m = self.m as f64;
        (0..self.m)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / m)
            .collect()
    }

    /// Forward transform, normalized so slot 0 is the mean.
    pub fn to_spectrum(&self, f: &[f64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.m);
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.m as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Synthesis back to real samples (imaginary parts are discarded).
    pub fn to_samples(&self, spec: &[Complex64]) -> Vec<f64> {
        assert_eq!(spec.len(), self.m);
        let mut buf = spec.to_vec();
        self.inv.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Multiply each mode by `sym(k)` and synthesize.
    pub fn apply_symbol(&self, f: &[f64], sym: impl Fn(i64) -> Complex64) -> Vec<f64> {
        let mut spec = self.to_spectrum(f);
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= sym(self.signed_k(i));
        }
        self.to_samples(&spec)
    }

    /// d/d alpha. The Nyquist mode is zeroed, as usual for odd operators.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let ny = (self.m / 2) as i64;
        self.apply_symbol(f, |k| {
            if k.abs() == ny {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k as f64)
            }
        })
    }

    /// Antiderivative of the oscillatory part; both the input mean and the
    /// output mean are dropped.
    pub fn antiderivative_mean_zero(&self, f: &[f64]) -> Vec<f64> {
        let ny = (self.m / 2) as i64;
        self.apply_symbol(f, |k| {
            if k == 0 || k.abs() == ny {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / k as f64)
            }
        })
    }

    /// 2/3-rule de-aliasing: zero every mode with |k| > m/3.
    pub fn lowpass_two_thirds(&self, f: &[f64]) -> Vec<f64> {
        let cut = (self.m / 3) as i64;
        self.apply_symbol(f, |k| {
            if k.abs() > cut {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }


    /// Trigonometric interpolation of real samples at arbitrary angles.
    pub fn interp(&self, f: &[f64], theta: &[f64]) -> Vec<f64> {
        let spec = self.to_spectrum(f);
        self.interp_from_spectrum(&spec, theta)
    }

    /// Same as `interp`, reusing an already computed spectrum.
    pub fn interp_from_spectrum(&self, spec: &[Complex64], theta: &[f64]) -> Vec<f64> {
        assert_eq!(spec.len(), self.m);
        let half = self.m / 2;
        theta
            .iter()
            .map(|&t| {
                let z = Complex64::new(t.cos(), t.sin());
                let mut zp = Complex64::new(1.0, 0.0);
                let mut acc = spec[0].re;
                for k in 1..half {
                    zp *= z;
                    acc += 2.0 * (spec[k] * zp).re;
                }
                zp *= z;
                // Nyquist cosine mode.
                acc += spec[half].re * zp.re;
                acc
            })
            .collect()
    }

    /// Largest |coefficient| over modes with |k| above `cut`.
    pub fn tail_amplitude(&self, f: &[f64], cut: i64) -> f64 {
        let spec = self.to_spectrum(f);
        spec.iter()
            .enumerate()
            .filter(|(i, _)| self.signed_k(*i).abs() > cut)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}
