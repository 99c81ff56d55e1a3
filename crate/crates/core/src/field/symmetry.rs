use serde::{Deserialize, Serialize};

use super::RealField;

/// Parity classes under the reflections `y₁ ↦ -y₁`, `y₂ ↦ -y₂`.
///
/// `Ee` stands in for radial functions, `Oe` is the `y₁`-odd / `y₂`-even class
/// of the imaginary perturbation. `Oo` and `Eo` appear for `V₂` and after
/// quarter-turn rotations. `Radial` adds invariance under the diagonal swap
/// `(y₁, y₂) ↦ (y₂, y₁)`, the largest subgroup of rotations a square grid
/// carries exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SymmetryClass {
    Ee,
    Oe,
    Eo,
    Oo,
    Radial,
}

impl SymmetryClass {
    /// Signs picked up under `y₁ ↦ -y₁` and `y₂ ↦ -y₂`.
    fn signs(self) -> (f64, f64) {
        match self {
            SymmetryClass::Ee | SymmetryClass::Radial => (1.0, 1.0),
            SymmetryClass::Oe => (-1.0, 1.0),
            SymmetryClass::Eo => (1.0, -1.0),
            SymmetryClass::Oo => (-1.0, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::Ee => "EE",
            SymmetryClass::Oe => "OE",
            SymmetryClass::Eo => "EO",
            SymmetryClass::Oo => "OO",
            SymmetryClass::Radial => "RADIAL",
        }
    }
}

/// Group average over the class's reflections; an L²-orthogonal projection.
pub fn project(field: &RealField, class: SymmetryClass) -> RealField {
    let mut out = field.clone();
    project_in_place(field.grid().n(), out.values_mut(), class);
    out
}

/// `‖f - project(f, class)‖_{L²}`.
pub fn symmetry_defect(field: &RealField, class: SymmetryClass) -> f64 {
    field.sub(&project(field, class)).norm_l2()
}

/// Projection on raw sample storage; used inside the Krylov loops.
pub(crate) fn project_in_place(n: usize, v: &mut [f64], class: SymmetryClass) {
    let (s1, s2) = class.signs();
    let refl = |i: usize| (n - i) % n;
    // each orbit {(i,j), (-i,j), (i,-j), (-i,-j)} is averaged once, from its
    // lexicographically smallest member
    for i in 0..n {
        let ri = refl(i);
        if ri < i {
            continue;
        }
        for j in 0..n {
            let rj = refl(j);
            if rj < j {
                continue;
            }
            let a = v[i * n + j];
            let b = v[ri * n + j];
            let c = v[i * n + rj];
            let d = v[ri * n + rj];
            let mean = 0.25 * (a + s1 * b + s2 * c + s1 * s2 * d);
            v[i * n + j] = mean;
            v[ri * n + j] = s1 * mean;
            v[i * n + rj] = s2 * mean;
            v[ri * n + rj] = s1 * s2 * mean;
        }
    }
    if class == SymmetryClass::Radial {
        for i in 0..n {
            for j in (i + 1)..n {
                let mean = 0.5 * (v[i * n + j] + v[j * n + i]);
                v[i * n + j] = mean;
                v[j * n + i] = mean;
            }
        }
    }
}
