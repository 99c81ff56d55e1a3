use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::fft::Fft2;
use crate::{Error, Result};

/// Periodic square box `[-L/2, L/2)²` sampled on `N × N` points.
///
/// Sample `(i, j)` sits at `(y₁, y₂) = (-L/2 + i·dx, -L/2 + j·dx)`, so the
/// origin is the sample `(N/2, N/2)` and the reflections `y_k ↦ -y_k` permute
/// samples exactly (`i ↦ (N - i) mod N`).
///
/// Frequencies use the centred lattice `ξ_k = 2πk/L`, `k = -N/2 .. N/2 - 1`.
/// The Nyquist row `k = -N/2` keeps its value in even symbols (`|ξ|²` and
/// friends) and is zeroed in odd ones (derivatives), since an odd symbol has
/// no consistent value there.
#[derive(Clone)]
pub struct Grid2D {
    n: usize,
    length: f64,
    xi: Arc<[f64]>,
    fft: Arc<Fft2>,
}

impl Grid2D {
    pub fn new(n_points: usize, box_length: f64) -> Result<Self> {
        if n_points < 16 || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "N must be even and at least 16, got {n_points}"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        let xi: Arc<[f64]> = (0..n_points)
            .map(|k| 2.0 * std::f64::consts::PI * centred_index(k, n_points) as f64 / box_length)
            .collect();
        Ok(Self {
            n: n_points,
            length: box_length,
            xi,
            fft: Fft2::shared(n_points),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight `dx²` of a single sample.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let dx = self.spacing();
        dx * dx
    }

    /// Number of samples, `N²`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    #[inline]
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx / self.n), self.coord(idx % self.n))
    }

    #[inline]
    pub fn radius(&self, idx: usize) -> f64 {
        let (a, b) = self.point(idx);
        a.hypot(b)
    }

    /// Index of the origin sample.
    #[inline]
    pub fn origin(&self) -> usize {
        (self.n / 2) * self.n + self.n / 2
    }

    /// Centred integer frequency of FFT index `k`.
    #[inline]
    pub fn freq_index(&self, k: usize) -> i64 {
        centred_index(k, self.n)
    }

    /// `ξ_k` for use in even symbols.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> f64 {
        self.xi[k]
    }

    /// `ξ_k` for use in odd symbols: zero on the Nyquist row.
    #[inline]
    pub fn deriv_wavenumber(&self, k: usize) -> f64 {
        if k == self.n / 2 {
            0.0
        } else {
            self.xi[k]
        }
    }

    #[inline]
    pub fn is_nyquist(&self, k: usize) -> bool {
        k == self.n / 2
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.xi
    }

    /// Largest `|ξ|` along one axis, `πN/L`.
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// In-place unnormalised forward DFT over the sample indices.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        self.fft.forward(data);
    }

    /// In-place inverse DFT including the `1/N²` normalisation.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        self.fft.inverse(data);
    }

    /// Grid with the same spacing and `factor` times the box, used for
    /// zero-padded far-field evaluation.
    pub fn extended(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("extension factor must be ≥ 1".into()));
        }
        Self::new(self.n * factor, self.length * factor as f64)
    }

    /// Same samples, box scaled by `factor` (used by the ω-rescaling).
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.length * factor)
    }
}

fn centred_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length.to_bits() == other.length.to_bits()
    }
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_length_over_n() {
        let g = Grid2D::new(256, 40.0).unwrap();
        assert_eq!(g.spacing(), 0.15625);
        assert_eq!(g.wavenumber(0), 0.0);
        assert_eq!(g.coord(128), 0.0);
    }

    #[test]
    fn two_pi_box_has_integer_lattice() {
        let g = Grid2D::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let mut ks: Vec<i64> = (0..16).map(|k| g.wavenumber(k).round() as i64).collect();
        for (k, &x) in ks.iter().zip(g.wavenumbers()) {
            assert!((*k as f64 - x).abs() < 1e-12);
        }
        ks.sort();
        assert_eq!(ks, (-8..8).collect::<Vec<_>>());
        assert_eq!(g.deriv_wavenumber(8), 0.0);
        assert_eq!(g.wavenumber(8), -8.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::new(255, 40.0).is_err());
        assert!(Grid2D::new(8, 40.0).is_err());
        assert!(Grid2D::new(64, 0.0).is_err());
        assert!(Grid2D::new(64, -1.0).is_err());
        assert!(Grid2D::new(64, f64::NAN).is_err());
    }

    #[test]
    fn lattice_is_symmetric_away_from_nyquist() {
        let g = Grid2D::new(32, 7.0).unwrap();
        for k in 1..32 {
            if g.is_nyquist(k) {
                continue;
            }
            let neg = (32 - k) % 32;
            assert_eq!(g.wavenumber(k), -g.wavenumber(neg));
        }
    }
}
