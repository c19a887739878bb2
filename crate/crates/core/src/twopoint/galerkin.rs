//! Fourier–Galerkin truncations of advection generators.
//!
//! A shear field u(y)∂_x restricted to the x-mode e^{iℓx} acts on y-mode
//! coefficients as iℓ·(convolution by û), an exactly anti-Hermitian
//! Toeplitz band matrix. A general divergence-free trigonometric field
//! σ·∇ on 𝕋² is truncated to the mean-free band
//! {e^{i(mx+ny)} : 0 < max(|m|, |n|) ≤ K}; because compression against an
//! orthogonal mode projection preserves adjoints and σ is divergence
//! free, the truncated matrix is again exactly anti-Hermitian. The
//! constructors nevertheless skew-symmetrize and record the correction
//! norm, so any violation of those premises upstream is measured rather
//! than assumed away.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{BlockAxis, FamilyExtension, GeneratorFamily, ShearGen};
use crate::error::{Error, Result};
use crate::profiles::{ProfileFamily, ShearProfile};

/// Fourier coefficient û(k) of a real trigonometric profile,
/// û(k) = (a_k − i b_k)/2 for k > 0 and û(−k) = conj û(k).
fn profile_mode(u: &ShearProfile, k: i64) -> Complex64 {
    let a = u.cosine_coeffs();
    let b = u.sine_coeffs();
    if k == 0 {
        return Complex64::new(a.first().copied().unwrap_or(0.0), 0.0);
    }
    let m = k.unsigned_abs() as usize;
    let ak = a.get(m).copied().unwrap_or(0.0);
    let bk = b.get(m - 1).copied().unwrap_or(0.0);
    let half = Complex64::new(ak / 2.0, -bk / 2.0);
    if k > 0 {
        half
    } else {
        half.conj()
    }
}

/// Truncation of a shear family u_j(y)∂_x on the x-mode e^{iℓx} to
/// y-modes −K..K: the (2K+1)×(2K+1) matrices iℓ·(convolution by û_j).
///
/// Requires K ≥ 2·(maximal profile degree), so products of a profile with
/// any retained mode are represented without wrap-around over at least
/// half the band.
pub fn galerkin_shear(family: &ProfileFamily, ell: i64, k: usize) -> Result<GeneratorFamily> {
    let max_deg = family
        .profiles()
        .iter()
        .map(|u| u.degree())
        .max()
        .unwrap_or(0);
    if k < 2 * max_deg || k == 0 {
        return Err(Error::Config(format!(
            "shear truncation needs K ≥ max(1, 2·degree) = {}, got {k}",
            (2 * max_deg).max(1)
        )));
    }
    let d = 2 * k + 1;
    let ik = k as i64;
    let mats: Vec<DMatrix<Complex64>> = family
        .profiles()
        .iter()
        .map(|u| {
            DMatrix::from_fn(d, d, |r, c| {
                let diff = (r as i64 - ik) - (c as i64 - ik);
                Complex64::new(0.0, ell as f64) * profile_mode(u, diff)
            })
        })
        .collect();
    let modes = (0..d).map(|i| (ell, i as i64 - ik)).collect();
    let pad = max_deg;
    let d_ext = 2 * (k + pad) + 1;
    let ext_mats = family
        .profiles()
        .iter()
        .map(|u| {
            let mut t = Vec::new();
            for c in 0..d_ext {
                for r in 0..d_ext {
                    let diff = r as i64 - c as i64;
                    if diff.unsigned_abs() as usize > u.degree() {
                        continue;
                    }
                    let v = Complex64::new(0.0, ell as f64) * profile_mode(u, diff);
                    if v != Complex64::default() {
                        t.push((r, c, v));
                    }
                }
            }
            t
        })
        .collect();
    let shear = family
        .profiles()
        .iter()
        .map(|u| {
            let deg = u.degree() as i64;
            ShearGen {
                blocks_on: BlockAxis::First,
                u_hat: (-deg..=deg)
                    .map(|q| (q, profile_mode(u, q)))
                    .filter(|(_, v)| *v != Complex64::default())
                    .collect(),
            }
        })
        .collect();
    let ext = FamilyExtension {
        dim_ext: d_ext,
        embed: (0..d).map(|i| i + pad).collect(),
        mats: ext_mats,
        shear: Some(shear),
    };
    GeneratorFamily::with_extension(
        mats,
        Some(modes),
        Some(format!(
            "shear truncation: {} profile(s), x-mode ℓ={ell}, y-band |n| ≤ {k}",
            family.profiles().len()
        )),
        0.0,
        Some(ext),
    )
}

/// A divergence-free trigonometric vector field on 𝕋², stored by its
/// Fourier modes σ̂(m, n) = (σ̂ˣ, σ̂ʸ).
///
/// Construction enforces reality (σ̂(−m,−n) = conj σ̂(m,n) componentwise)
/// and the divergence-free condition m σ̂ˣ(m,n) + n σ̂ʸ(m,n) = 0 on every
/// mode.
#[derive(Debug, Clone)]
pub struct VectorField2d {
    modes: BTreeMap<(i64, i64), (Complex64, Complex64)>,
}

impl VectorField2d {
    /// Builds a field from explicit Fourier modes.
    pub fn from_modes(entries: &[((i64, i64), (Complex64, Complex64))]) -> Result<Self> {
        let mut modes: BTreeMap<(i64, i64), (Complex64, Complex64)> = BTreeMap::new();
        for &(key, (x, y)) in entries {
            if !(x.re.is_finite() && x.im.is_finite() && y.re.is_finite() && y.im.is_finite()) {
                return Err(Error::Config(format!("non-finite coefficient at mode {key:?}")));
            }
            let slot = modes.entry(key).or_insert((Complex64::default(), Complex64::default()));
            slot.0 += x;
            slot.1 += y;
        }
        let scale = modes
            .values()
            .map(|(x, y)| x.norm().max(y.norm()))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        for (&(m, n), &(x, y)) in &modes {
            let (cx, cy) = modes.get(&(-m, -n)).copied().unwrap_or_default();
            if (x - cx.conj()).norm() > 1e-12 * scale || (y - cy.conj()).norm() > 1e-12 * scale {
                return Err(Error::Config(format!(
                    "field is not real: mode {:?} is not the conjugate of mode {:?}",
                    (m, n),
                    (-m, -n)
                )));
            }
            let div = (x * m as f64 + y * n as f64).norm();
            if div > 1e-12 * scale * ((m.abs() + n.abs()).max(1) as f64) {
                return Err(Error::Config(format!(
                    "field is not divergence free: |m σ̂ˣ + n σ̂ʸ| = {div:.3e} at mode {:?}",
                    (m, n)
                )));
            }
        }
        Ok(Self { modes })
    }

    /// The horizontal shear (u(y), 0).
    pub fn shear_x(u: &ShearProfile) -> Self {
        let deg = u.degree() as i64;
        let entries: Vec<_> = (-deg..=deg)
            .map(|n| ((0i64, n), (profile_mode(u, n), Complex64::default())))
            .collect();
        Self::from_modes(&entries).expect("a shear field is real and divergence free")
    }

    /// The vertical shear (0, u(x)).
    pub fn shear_y(u: &ShearProfile) -> Self {
        let deg = u.degree() as i64;
        let entries: Vec<_> = (-deg..=deg)
            .map(|m| ((m, 0i64), (Complex64::default(), profile_mode(u, m))))
            .collect();
        Self::from_modes(&entries).expect("a shear field is real and divergence free")
    }

    /// The constant field (cx, cy).
    pub fn constant(cx: f64, cy: f64) -> Self {
        Self::from_modes(&[((0, 0), (Complex64::new(cx, 0.0), Complex64::new(cy, 0.0)))])
            .expect("a constant field is real and divergence free")
    }

    /// Largest |m| or |n| carrying a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.modes
            .iter()
            .filter(|(_, (x, y))| x.norm() > 0.0 || y.norm() > 0.0)
            .map(|(&(m, n), _)| m.unsigned_abs().max(n.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }

    fn mode(&self, m: i64, n: i64) -> (Complex64, Complex64) {
        self.modes.get(&(m, n)).copied().unwrap_or_default()
    }
}

/// Truncation of divergence-free fields σ_j·∇ on 𝕋² to the mean-free
/// Fourier band {(m, n) : 0 < max(|m|, |n|) ≤ K}.
///
/// The matrices are skew-symmetrized after assembly and the correction
/// norm is recorded on the family; for exact Fourier compression of a
/// divergence-free field the correction vanishes to roundoff.
pub fn galerkin_2d(fields: &[VectorField2d], k: usize) -> Result<GeneratorFamily> {
    if fields.is_empty() {
        return Err(Error::Config("galerkin_2d needs at least one field".into()));
    }
    let max_deg = fields.iter().map(|f| f.degree()).max().unwrap_or(0);
    if k < (2 * max_deg).max(1) {
        return Err(Error::Config(format!(
            "2d truncation needs K ≥ max(1, 2·degree) = {}, got {k}",
            (2 * max_deg).max(1)
        )));
    }
    let ik = k as i64;
    let mut modes = Vec::new();
    for m in -ik..=ik {
        for n in -ik..=ik {
            if m != 0 || n != 0 {
                modes.push((m, n));
            }
        }
    }
    let d = modes.len();
    let mut correction: f64 = 0.0;
    let mats = fields
        .iter()
        .map(|f| {
            let raw = DMatrix::from_fn(d, d, |r, c| {
                let (ma, na) = modes[r];
                let (mb, nb) = modes[c];
                let (sx, sy) = f.mode(ma - mb, na - nb);
                Complex64::new(0.0, 1.0) * (sx * mb as f64 + sy * nb as f64)
            });
            let adj = raw.adjoint();
            let skew = (&raw - &adj).scale(0.5);
            correction = correction.max((&raw - &skew).norm());
            skew
        })
        .collect();
    let kk = (k + max_deg) as i64;
    let mut ext_modes = Vec::new();
    for m in -kk..=kk {
        for n in -kk..=kk {
            ext_modes.push((m, n));
        }
    }
    let ext_index: HashMap<(i64, i64), usize> =
        ext_modes.iter().copied().enumerate().map(|(i, md)| (md, i)).collect();
    let ext_mats = fields
        .iter()
        .map(|f| {
            let mut t = Vec::new();
            for (c, &(mb, nb)) in ext_modes.iter().enumerate() {
                for (&(qm, qn), &(sx, sy)) in &f.modes {
                    let v = Complex64::new(0.0, 1.0) * (sx * mb as f64 + sy * nb as f64);
                    if v == Complex64::default() {
                        continue;
                    }
                    if let Some(&r) = ext_index.get(&(mb + qm, nb + qn)) {
                        t.push((r, c, v));
                    }
                }
            }
            t
        })
        .collect();
    let shear = fields.iter().map(shear_structure).collect::<Option<Vec<_>>>();
    let ext = FamilyExtension {
        dim_ext: ext_modes.len(),
        embed: modes.iter().map(|md| ext_index[md]).collect(),
        mats: ext_mats,
        shear,
    };
    GeneratorFamily::with_extension(
        mats,
        Some(modes),
        Some(format!(
            "2d truncation: {} field(s), mean-free band max(|m|,|n|) ≤ {k}",
            fields.len()
        )),
        correction,
        Some(ext),
    )
}

/// Recognizes a field of the form (u(y), 0) or (0, v(x)); in the
/// two-point picture such a field acts per transverse-mode pair as a
/// multiplication operator, which the kernel solver exploits.
fn shear_structure(f: &VectorField2d) -> Option<ShearGen> {
    let zero = Complex64::default();
    let mut x_shear = true;
    let mut y_shear = true;
    for (&(m, n), &(sx, sy)) in &f.modes {
        if sy != zero || (sx != zero && m != 0) {
            x_shear = false;
        }
        if sx != zero || (sy != zero && n != 0) {
            y_shear = false;
        }
    }
    if x_shear {
        let u_hat = f
            .modes
            .iter()
            .filter(|&(_, &(sx, _))| sx != zero)
            .map(|(&(_, n), &(sx, _))| (n, sx))
            .collect();
        Some(ShearGen {
            blocks_on: BlockAxis::First,
            u_hat,
        })
    } else if y_shear {
        let u_hat = f
            .modes
            .iter()
            .filter(|&(_, &(_, sy))| sy != zero)
            .map(|(&(m, _), &(_, sy))| (m, sy))
            .collect();
        Some(ShearGen {
            blocks_on: BlockAxis::Second,
            u_hat,
        })
    } else {
        None
    }
}
