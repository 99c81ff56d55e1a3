use num_complex::Complex64;

use super::Grid2D;
use crate::{Error, Result};

/// Real scalar field sampled on a [`Grid2D`], row-major in `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid2D,
    values: Vec<f64>,
}

/// Complex scalar field sampled on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid2D,
    values: Vec<Complex64>,
}

/// Fourier coefficients of a field (unnormalised DFT over the samples).
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

/// One lattice mode as seen by a symbol: `xi` for even symbols, `dxi` for odd
/// ones (Nyquist zeroed).
#[derive(Clone, Copy, Debug)]
pub struct Mode {
    pub xi: [f64; 2],
    pub dxi: [f64; 2],
    pub index: [usize; 2],
}

impl Mode {
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.index == [0, 0]
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]
    }
}

impl RealField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("real field"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (a, b) = grid.point(idx);
                f(a, b)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Builds a field from its flat index (row-major, first index along `y₁`).
    pub fn from_fn_indexed(grid: &Grid2D, f: impl Fn(usize) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.len()).map(f).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n() + j]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec_unchecked(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_vec_unchecked(self.grid.clone(), values)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Discrete `L²` inner product `dx² Σ f g`.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.cell_area() * dot(&self.values, &other.values)
    }

    /// Discrete `L²` norm `(dx² Σ f²)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature `dx² Σ f`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_area() * self.values.iter().sum::<f64>()
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.forward(&mut coeffs);
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField::from_vec_unchecked(
            self.grid.clone(),
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Apply a real even symbol (or any symbol whose output is real).
    pub fn apply_symbol(&self, symbol: impl Fn(&Mode) -> f64) -> Self {
        self.spectrum().multiply(|m| Complex64::new(symbol(m), 0.0)).to_real()
    }

    /// `∂^{(m1, m2)}` spectrally.
    pub fn derivative(&self, m1: u32, m2: u32) -> Self {
        if m1 == 0 && m2 == 0 {
            return self.clone();
        }
        self.spectrum().multiply(|m| derivative_symbol(m, m1, m2)).to_real()
    }

    pub fn gradient(&self) -> [Self; 2] {
        let s = self.spectrum();
        [
            s.clone().multiply(|m| derivative_symbol(m, 1, 0)).to_real(),
            s.multiply(|m| derivative_symbol(m, 0, 1)).to_real(),
        ]
    }

    pub fn laplacian(&self) -> Self {
        self.apply_symbol(|m| -m.norm_sqr())
    }

    /// `‖(1 + |ξ|²)^{s/2} f̂‖` with Parseval-consistent normalisation; `s = 0`
    /// reproduces [`RealField::norm_l2`].
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        if s == 0.0 {
            return self.norm_l2();
        }
        self.spectrum().sobolev_norm(s)
    }

    /// Zero-padded copy on a box `factor` times larger with the same spacing.
    /// The original samples keep their physical coordinates.
    pub fn extend(&self, factor: usize) -> Result<Self> {
        let big = self.grid.extended(factor)?;
        let n = self.grid.n();
        let nb = big.n();
        let off = (factor - 1) * n / 2;
        let mut values = vec![0.0; big.len()];
        for i in 0..n {
            let src = &self.values[i * n..(i + 1) * n];
            let dst = (i + off) * nb + off;
            values[dst..dst + n].copy_from_slice(src);
        }
        Ok(Self::from_vec_unchecked(big, values))
    }

    /// Inverse of [`RealField::extend`]: the central `n × n` window.
    pub fn restrict(&self, grid: &Grid2D) -> Result<Self> {
        let (n, nb) = (grid.n(), self.grid.n());
        if nb < n || (nb - n) % 2 != 0 || (self.grid.spacing() - grid.spacing()).abs() > 1e-12 * grid.spacing() {
            return Err(Error::GridMismatch);
        }
        let off = (nb - n) / 2;
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let start = (i + off) * nb + off;
            values.extend_from_slice(&self.values[start..start + n]);
        }
        Ok(Self::from_vec_unchecked(grid.clone(), values))
    }

    /// Periodic bilinear interpolation at a physical point.
    pub fn sample_bilinear(&self, y1: f64, y2: f64) -> f64 {
        bilinear(&self.grid, y1, y2, |idx| self.values[idx])
    }
}

impl ComplexField {
    pub fn new(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("complex field"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid2D, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_parts(re: &RealField, im: &RealField) -> Self {
        debug_assert_eq!(re.grid, im.grid);
        let values = re
            .values
            .iter()
            .zip(&im.values)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        Self::from_vec_unchecked(re.grid.clone(), values)
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (a, b) = grid.point(idx);
                f(a, b)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_fn_indexed(grid: &Grid2D, f: impl Fn(usize) -> Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.len()).map(f).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn re(&self) -> RealField {
        RealField::from_vec_unchecked(self.grid.clone(), self.values.iter().map(|z| z.re).collect())
    }

    pub fn im(&self) -> RealField {
        RealField::from_vec_unchecked(self.grid.clone(), self.values.iter().map(|z| z.im).collect())
    }

    pub fn abs(&self) -> RealField {
        RealField::from_vec_unchecked(self.grid.clone(), self.values.iter().map(|z| z.norm()).collect())
    }

    pub fn abs_sqr(&self) -> RealField {
        RealField::from_vec_unchecked(self.grid.clone(), self.values.iter().map(|z| z.norm_sqr()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::from_vec_unchecked(self.grid.clone(), values)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_vec_unchecked(self.grid.clone(), self.values.iter().map(|z| z * s).collect())
    }

    pub fn mul_real(&self, f: &RealField) -> Self {
        debug_assert_eq!(self.grid, f.grid);
        let values = self.values.iter().zip(&f.values).map(|(z, &r)| z * r).collect();
        Self::from_vec_unchecked(self.grid.clone(), values)
    }

    /// Real part of the discrete pairing `dx² Σ conj(a) b`.
    pub fn inner_re(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        self.grid.cell_area() * s
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner_re(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs = self.values.clone();
        self.grid.forward(&mut coeffs);
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn derivative(&self, m1: u32, m2: u32) -> Self {
        if m1 == 0 && m2 == 0 {
            return self.clone();
        }
        self.spectrum().multiply(|m| derivative_symbol(m, m1, m2)).to_complex()
    }

    pub fn laplacian(&self) -> Self {
        self.spectrum()
            .multiply(|m| Complex64::new(-m.norm_sqr(), 0.0))
            .to_complex()
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        if s == 0.0 {
            return self.norm_l2();
        }
        self.spectrum().sobolev_norm(s)
    }

    /// Translate by `shift` (the result samples `f(y - shift)`), exactly in
    /// Fourier space.
    pub fn translate(&self, shift: [f64; 2]) -> Self {
        self.spectrum()
            .multiply(|m| {
                // odd phase: keep the Nyquist row out of it
                let phase = -(m.dxi[0] * shift[0] + m.dxi[1] * shift[1]);
                Complex64::from_polar(1.0, phase)
            })
            .to_complex()
    }

    pub fn sample_bilinear(&self, y1: f64, y2: f64) -> Complex64 {
        let re = bilinear(&self.grid, y1, y2, |idx| self.values[idx].re);
        let im = bilinear(&self.grid, y1, y2, |idx| self.values[idx].im);
        Complex64::new(re, im)
    }
}

impl Spectrum {
    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let g = &self.grid;
        let n = g.n();
        (0..g.len()).map(move |idx| mode(g, idx / n, idx % n))
    }

    pub fn multiply(mut self, symbol: impl Fn(&Mode) -> Complex64) -> Self {
        let n = self.grid.n();
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            let m = mode(&self.grid, idx / n, idx % n);
            *c *= symbol(&m);
        }
        self
    }

    pub fn to_complex(self) -> ComplexField {
        let mut values = self.coeffs;
        self.grid.inverse(&mut values);
        ComplexField::from_vec_unchecked(self.grid, values)
    }

    pub fn to_real(self) -> RealField {
        let mut values = self.coeffs;
        self.grid.inverse(&mut values);
        RealField::from_vec_unchecked(self.grid, values.into_iter().map(|z| z.re).collect())
    }

    /// Largest imaginary part of the inverse transform relative to the
    /// largest modulus; zero for spectra of real fields.
    pub fn imaginary_residue(self) -> f64 {
        let f = self.to_complex();
        let max = f.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        f.values.iter().fold(0.0f64, |m, z| m.max(z.im.abs())) / max
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let n2 = self.grid.len() as f64;
        let mut acc = 0.0;
        for m in self.modes() {
            let idx = m.index[0] * self.grid.n() + m.index[1];
            acc += (1.0 + m.norm_sqr()).powf(s) * self.coeffs[idx].norm_sqr();
        }
        (self.grid.cell_area() * acc / n2).sqrt()
    }
}

#[inline]
fn mode(g: &Grid2D, k1: usize, k2: usize) -> Mode {
    Mode {
        xi: [g.wavenumber(k1), g.wavenumber(k2)],
        dxi: [g.deriv_wavenumber(k1), g.deriv_wavenumber(k2)],
        index: [k1, k2],
    }
}

/// `(iξ₁)^{m1} (iξ₂)^{m2}` with the Nyquist convention: odd powers use the
/// zeroed wavenumber, even powers the signed one.
pub(crate) fn derivative_symbol(m: &Mode, m1: u32, m2: u32) -> Complex64 {
    let pick = |axis: usize, p: u32| if p % 2 == 1 { m.dxi[axis] } else { m.xi[axis] };
    let mag = pick(0, m1).powi(m1 as i32) * pick(1, m2).powi(m2 as i32);
    Complex64::i().powu(m1 + m2) * mag
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bilinear(g: &Grid2D, y1: f64, y2: f64, value: impl Fn(usize) -> f64) -> f64 {
    let n = g.n();
    let dx = g.spacing();
    let locate = |y: f64| {
        let s = ((y + 0.5 * g.length()) / dx).rem_euclid(n as f64);
        let i0 = s.floor();
        (i0 as usize % n, s - i0)
    };
    let (i0, t1) = locate(y1);
    let (j0, t2) = locate(y2);
    let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
    (1.0 - t1) * (1.0 - t2) * value(i0 * n + j0)
        + t1 * (1.0 - t2) * value(i1 * n + j0)
        + (1.0 - t1) * t2 * value(i0 * n + j1)
        + t1 * t2 * value(i1 * n + j1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian(grid: &Grid2D) -> RealField {
        RealField::from_fn(grid, |a, b| (-(a * a + b * b)).exp())
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Grid2D::new(32, 10.0).unwrap();
        let z = RealField::zeros(&g);
        for s in [0.0, 1.0, 2.5] {
            assert_eq!(z.sobolev_norm(s), 0.0);
        }
    }

    #[test]
    fn single_mode_h2_weight() {
        let g = Grid2D::new(32, 2.0 * PI).unwrap();
        let f = RealField::from_fn(&g, |a, _| a.cos());
        let ratio = f.sobolev_norm(2.0) / f.sobolev_norm(0.0);
        assert!((ratio - 2.0).abs() < 1e-12, "{ratio}");
        // ‖cos y₁‖² on the (2π)² torus is 2π²
        assert!((f.norm_l2().powi(2) - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn gaussian_h1_matches_quadrature() {
        let g = Grid2D::new(128, 16.0).unwrap();
        let f = gaussian(&g);
        // |∇f|² = 4|y|² e^{-2|y|²}, evaluated analytically
        let dense = RealField::from_fn(&g, |a, b| {
            let r2 = a * a + b * b;
            (1.0 + 4.0 * r2) * (-2.0 * r2).exp()
        });
        let exact = dense.integral().sqrt();
        let h1 = f.sobolev_norm(1.0);
        assert!((h1 - exact).abs() / exact < 1e-8, "{h1} vs {exact}");
        // and against the closed form ∫(1 + 4r²)e^{-2r²} = π/2 + π
        assert!((h1 * h1 - 1.5 * PI).abs() < 1e-8);
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = Grid2D::new(64, 16.0).unwrap();
        let f = gaussian(&g);
        let d = f.derivative(1, 0);
        let exact = RealField::from_fn(&g, |a, b| -2.0 * a * (-(a * a + b * b)).exp());
        assert!(d.sub(&exact).max_abs() < 1e-10);
        let lap = f.laplacian();
        let exact = RealField::from_fn(&g, |a, b| {
            let r2 = a * a + b * b;
            (4.0 * r2 - 4.0) * (-r2).exp()
        });
        assert!(lap.sub(&exact).max_abs() < 1e-9);
    }

    #[test]
    fn extend_and_restrict_round_trip() {
        let g = Grid2D::new(32, 8.0).unwrap();
        let f = gaussian(&g);
        let big = f.extend(3).unwrap();
        assert_eq!(big.grid().n(), 96);
        assert!((big.grid().spacing() - g.spacing()).abs() < 1e-15);
        assert_eq!(big.at(48, 48), f.at(16, 16));
        assert!((big.integral() - f.integral()).abs() < 1e-14);
        assert_eq!(big.restrict(&g).unwrap(), f);
    }

    #[test]
    fn translation_is_exact_for_band_limited_fields() {
        let g = Grid2D::new(32, 2.0 * PI).unwrap();
        let f = ComplexField::from_fn(&g, |a, b| Complex64::new(a.cos(), (2.0 * b).sin()));
        let t = f.translate([0.3, -0.7]);
        let exact = ComplexField::from_fn(&g, |a, b| Complex64::new((a - 0.3).cos(), (2.0 * (b + 0.7)).sin()));
        assert!(t.sub(&exact).max_abs() < 1e-12);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let g = Grid2D::new(16, 1.0).unwrap();
        let mut v = vec![0.0; 256];
        v[3] = f64::NAN;
        assert!(RealField::new(g, v).is_err());
    }
}
