//! Block-diagonal kernel certification for coordinate-shear families.
//!
//! When every generator is a coordinate shear u(w)∂_v, its commutator in
//! the two-point picture preserves the transverse-mode pair (m, m') and
//! acts on the block as multiplication by the function
//!
//! f_{mm'}(w, w') = m·u(w) − m'·u(w').
//!
//! A band-limited block therefore lies in the kernel of that generator
//! exactly when f_{mm'}·M ≡ 0. For a trigonometric multiplier this splits
//! into two exact cases: f_{mm'} ≡ 0, in which case the whole block is
//! kernel, or f_{mm'} ≢ 0, in which case the zero set has measure zero,
//! no nonzero band-limited block can be annihilated, and positivity of
//! the compressed multiplication operator by |f_{mm'}|² certifies the
//! block empty. Positivity is certified by a sparse Cholesky
//! factorization of the compressed operator minus the decision threshold,
//! one small factorization per block instead of one eigensolve on the
//! d²-dimensional superoperator. The joint kernel across generators is
//! then supported on the product of the surviving transverse-pair sets,
//! and matrix units on that support form an orthonormal Hermitian basis.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::superop::{KernelBasis, GAP_RATIO, TOL_NULL};
use super::{BlockAxis, FamilyExtension, GeneratorFamily, ShearGen};
use crate::error::{Error, Result};

/// Largest kernel dimension the structured route will materialize.
pub(crate) const STRUCTURED_CAP: usize = 1024;

/// Fourier coefficients of the block multiplier m·u(w) − m'·u(w').
fn multiplier_modes(
    gen: &ShearGen,
    m: i64,
    mp: i64,
) -> BTreeMap<(i64, i64), Complex64> {
    let mut f: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
    for &(p, v) in &gen.u_hat {
        *f.entry((p, 0)).or_default() += v * m as f64;
        *f.entry((0, p)).or_default() -= v * mp as f64;
    }
    f.retain(|_, v| *v != Complex64::default());
    f
}

/// Fourier coefficients of |f|² from those of f.
fn abs_squared_modes(
    f: &BTreeMap<(i64, i64), Complex64>,
) -> BTreeMap<(i64, i64), Complex64> {
    let mut g: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
    for (&(r1, s1), &v1) in f {
        for (&(r2, s2), &v2) in f {
            *g.entry((r1 - r2, s1 - s2)).or_default() += v1 * v2.conj();
        }
    }
    g
}

/// ℓ¹ norm of the stencil, an upper bound on the operator norm of the
/// compressed multiplication by |f|².
fn stencil_l1(g: &BTreeMap<(i64, i64), Complex64>) -> f64 {
    g.values().map(|v| v.norm()).sum()
}

/// Attempts a Cholesky factorization of (H − shift·I) where H is the
/// compression of multiplication by the trigonometric function with
/// coefficients `g` onto the grid rows × cols. Success certifies
/// λ_min(H) > shift up to roundoff.
fn block_positive_above(
    g: &BTreeMap<(i64, i64), Complex64>,
    rows: &[i64],
    cols: &[i64],
    shift: f64,
) -> Result<bool> {
    let rpos: HashMap<i64, usize> = rows.iter().copied().zip(0..).collect();
    let cpos: HashMap<i64, usize> = cols.iter().copied().zip(0..).collect();
    let nr = rows.len();
    let nc = cols.len();
    let n = nr * nc;
    let real = g.values().all(|v| v.im == 0.0);
    let dim = if real { n } else { 2 * n };
    let mut trips: Vec<Triplet<u32, u32, f64>> = Vec::new();
    let mut push = |r: usize, c: usize, z: Complex64| {
        if real {
            if r >= c {
                trips.push(Triplet::new(r as u32, c as u32, z.re));
            }
            return;
        }
        // Realification [[Re, −Im], [Im, Re]] keeps the spectrum and
        // therefore the positivity decision; only the lower triangle is
        // stored.
        if r >= c {
            trips.push(Triplet::new(r as u32, c as u32, z.re));
            trips.push(Triplet::new((r + n) as u32, (c + n) as u32, z.re));
        }
        if r + n >= c {
            trips.push(Triplet::new((r + n) as u32, c as u32, z.im));
        }
        if r >= c + n {
            trips.push(Triplet::new(r as u32, (c + n) as u32, -z.im));
        }
    };
    for (i, &a) in rows.iter().enumerate() {
        for (j, &b) in cols.iter().enumerate() {
            let col = i * nc + j;
            for (&(p, q), &v) in g {
                let ar = a + p;
                let br = b - q;
                let (Some(&ip), Some(&jp)) = (rpos.get(&ar), cpos.get(&br)) else {
                    continue;
                };
                let row = ip * nc + jp;
                let val = if row == col {
                    v - Complex64::new(shift, 0.0)
                } else {
                    v
                };
                push(row, col, val);
            }
        }
    }
    let mat = SparseColMat::<u32, f64>::try_new_from_triplets(dim, dim, &trips)
        .map_err(|e| Error::Degenerate(format!("block stencil assembly failed: {e:?}")))?;
    let symbolic = SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
        .map_err(|e| Error::Degenerate(format!("block symbolic analysis failed: {e:?}")))?;
    Ok(Llt::try_new_with_symbolic(symbolic, mat.as_ref(), Side::Lower).is_ok())
}

/// Survivor classification of one transverse pair against every
/// generator acting on that axis.
enum PairStatus {
    Kernel,
    Empty,
    Ambiguous { lower: f64 },
}

fn classify_pair(
    gens: &[(usize, &ShearGen)],
    pair: (i64, i64),
    rows: &[i64],
    cols: &[i64],
    tau: f64,
    cache: &mut HashMap<(i64, i64, usize), bool>,
    cache_ok: bool,
) -> Result<PairStatus> {
    let (v, vp) = pair;
    let canonical = *[(v, vp), (vp, v), (-v, -vp), (-vp, -v)]
        .iter()
        .min()
        .expect("four candidates");
    let mut all_zero = true;
    let mut failed: Vec<BTreeMap<(i64, i64), Complex64>> = Vec::new();
    for &(pid, gen) in gens {
        let f = multiplier_modes(gen, v, vp);
        if f.is_empty() {
            continue;
        }
        all_zero = false;
        let key = (canonical.0, canonical.1, pid);
        if cache_ok {
            if let Some(&pos) = cache.get(&key) {
                if pos {
                    return Ok(PairStatus::Empty);
                }
                continue;
            }
        }
        let g = abs_squared_modes(&f);
        let pos = block_positive_above(&g, rows, cols, 2.0 * tau)?;
        if cache_ok {
            cache.insert(key, pos);
        }
        if pos {
            return Ok(PairStatus::Empty);
        }
        failed.push(g);
    }
    if all_zero {
        return Ok(PairStatus::Kernel);
    }
    // No generator certified the pair empty: bracket the smallest block
    // eigenvalue downward for the diagnostic message.
    let mut best_lower: f64 = 0.0;
    for g in &failed {
        for frac in [4.0, 16.0, 64.0] {
            if block_positive_above(g, rows, cols, 2.0 * tau / frac)? {
                best_lower = best_lower.max(tau / frac);
                break;
            }
        }
    }
    Ok(PairStatus::Ambiguous { lower: best_lower })
}

/// Kernel of the compressed superoperator for a family in which every
/// generator is a coordinate shear.
pub(crate) fn kernel_structured(
    family: &GeneratorFamily,
    tol: Option<f64>,
) -> Result<KernelBasis> {
    let modes = family.modes().ok_or_else(|| {
        Error::Config("structured kernel route needs Fourier-mode metadata".into())
    })?;
    let ext = family.extension().ok_or_else(|| {
        Error::Config("structured kernel route needs the padded-band extension".into())
    })?;
    let shear = ext.shear.as_ref().ok_or_else(|| {
        Error::Config("structured kernel route needs shear structure on every generator".into())
    })?;

    let mut sec_of_first: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    let mut fst_of_second: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(m, n) in modes {
        sec_of_first.entry(m).or_default().push(n);
        fst_of_second.entry(n).or_default().push(m);
    }
    for v in sec_of_first.values_mut().chain(fst_of_second.values_mut()) {
        v.sort_unstable();
    }

    // Pair caching across blocks and axes is valid only when every slice
    // of the band is the full symmetric range with at most the origin
    // removed, as produced by the Galerkin constructors.
    let kmax = modes
        .iter()
        .map(|&(m, n)| m.unsigned_abs().max(n.unsigned_abs()))
        .max()
        .unwrap_or(0) as i64;
    let full_range = |v: &Vec<i64>, excl0: bool| {
        let want: Vec<i64> = (-kmax..=kmax).filter(|&x| !(excl0 && x == 0)).collect();
        *v == want
    };
    let cache_ok = sec_of_first
        .iter()
        .all(|(&m, v)| full_range(v, m == 0) || *v == (-kmax..=kmax).collect::<Vec<_>>())
        && fst_of_second
            .iter()
            .all(|(&n, v)| full_range(v, n == 0) || *v == (-kmax..=kmax).collect::<Vec<_>>());

    // Deduplicate profiles so equal shears on different axes share
    // factorizations.
    let mut profiles: Vec<&Vec<(i64, Complex64)>> = Vec::new();
    let pid_of: Vec<usize> = shear
        .iter()
        .map(|g| {
            if let Some(i) = profiles.iter().position(|p| **p == g.u_hat) {
                i
            } else {
                profiles.push(&g.u_hat);
                profiles.len() - 1
            }
        })
        .collect();

    // Global scale: −𝕃 = ½ Σ_k T_k† T_k, and each block of T_k† T_k is a
    // compressed multiplication whose norm the stencil ℓ¹ bound controls.
    let mut sigma = 0.0;
    for gen in shear {
        let vmax = match gen.blocks_on {
            BlockAxis::First => sec_of_first.keys().map(|m| m.abs()).max().unwrap_or(0),
            BlockAxis::Second => fst_of_second.keys().map(|n| n.abs()).max().unwrap_or(0),
        };
        let sp = stencil_l1(&abs_squared_modes(&multiplier_modes(gen, vmax, vmax)));
        let sm = stencil_l1(&abs_squared_modes(&multiplier_modes(gen, vmax, -vmax)));
        sigma += 0.5 * sp.max(sm);
    }
    if sigma == 0.0 {
        return Err(Error::Degenerate(
            "kernel of the zero family is the whole matrix space".into(),
        ));
    }
    let thresh = tol.unwrap_or(TOL_NULL) * sigma;
    let tau = GAP_RATIO * thresh;

    let mut cache: HashMap<(i64, i64, usize), bool> = HashMap::new();
    let mut survivors: [Option<BTreeSet<(i64, i64)>>; 2] = [None, None];
    for (axis_idx, axis) in [BlockAxis::First, BlockAxis::Second].into_iter().enumerate() {
        let gens: Vec<(usize, &ShearGen)> = shear
            .iter()
            .enumerate()
            .filter(|(_, g)| g.blocks_on == axis)
            .map(|(i, g)| (pid_of[i], g))
            .collect();
        if gens.is_empty() {
            continue;
        }
        let grids: &BTreeMap<i64, Vec<i64>> = match axis {
            BlockAxis::First => &sec_of_first,
            BlockAxis::Second => &fst_of_second,
        };
        let vals: Vec<i64> = grids.keys().copied().collect();
        let mut set = BTreeSet::new();
        for &v in &vals {
            for &vp in &vals {
                match classify_pair(
                    &gens,
                    (v, vp),
                    &grids[&v],
                    &grids[&vp],
                    tau,
                    &mut cache,
                    cache_ok,
                )? {
                    PairStatus::Kernel => {
                        set.insert((v, vp));
                    }
                    PairStatus::Empty => {}
                    PairStatus::Ambiguous { lower } => {
                        return Err(Error::AmbiguousRank {
                            kept: lower,
                            dropped: tau,
                            ratio: tau / lower.max(thresh),
                            required: GAP_RATIO,
                        });
                    }
                }
            }
        }
        survivors[axis_idx] = Some(set);
    }

    let in_x = |p: (i64, i64)| survivors[0].as_ref().is_none_or(|s| s.contains(&p));
    let in_y = |p: (i64, i64)| survivors[1].as_ref().is_none_or(|s| s.contains(&p));

    let d = modes.len();
    let mut support: Vec<(usize, usize)> = Vec::new();
    for (a, &(ma, na)) in modes.iter().enumerate() {
        for (b, &(mb, nb)) in modes.iter().enumerate() {
            if in_x((ma, mb)) && in_y((na, nb)) {
                support.push((a, b));
                if support.len() > STRUCTURED_CAP {
                    return Err(Error::UnsupportedSize(format!(
                        "structured kernel exceeds {STRUCTURED_CAP} Hermitian dimensions; \
                         reduce the cutoff"
                    )));
                }
            }
        }
    }
    let contains_identity = (0..d).all(|a| {
        let (m, n) = modes[a];
        in_x((m, m)) && in_y((n, n))
    });

    let zero = Complex64::default();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut matrices = Vec::with_capacity(support.len());
    for &(a, b) in &support {
        if a == b {
            let mut e = DMatrix::from_element(d, d, zero);
            e[(a, a)] = Complex64::new(1.0, 0.0);
            matrices.push(e);
        } else if a < b {
            // The support is symmetric, so (b, a) is present as well and
            // the pair carries one symmetric and one antisymmetric unit.
            let mut e = DMatrix::from_element(d, d, zero);
            e[(a, b)] = Complex64::new(s, 0.0);
            e[(b, a)] = Complex64::new(s, 0.0);
            matrices.push(e);
            let mut f = DMatrix::from_element(d, d, zero);
            f[(a, b)] = Complex64::new(0.0, s);
            f[(b, a)] = Complex64::new(0.0, -s);
            matrices.push(f);
        }
    }
    if matrices.len() > STRUCTURED_CAP {
        return Err(Error::UnsupportedSize(format!(
            "structured kernel has dimension {}, above the materialization cap {STRUCTURED_CAP}; \
             reduce the cutoff",
            matrices.len()
        )));
    }

    let max_commutator = matrices
        .iter()
        .map(|m| commutator_residual(ext, m))
        .fold(0.0f64, f64::max);

    Ok(KernelBasis {
        matrices,
        tol: thresh,
        max_commutator,
        contains_identity,
        complete: true,
    })
}

/// Largest Frobenius norm of the exact continuum commutators [L_k, M],
/// evaluated through the padded-band action.
pub(crate) fn commutator_residual(ext: &FamilyExtension, m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    let mut worst: f64 = 0.0;
    for tk in &ext.mats {
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); ext.dim_ext];
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); ext.dim_ext];
        for &(r, c, v) in tk {
            cols[c].push((r, v));
            rows[r].push((c, v));
        }
        let mut acc: HashMap<(usize, usize), Complex64> = HashMap::new();
        for a in 0..d {
            for b in 0..d {
                let v = m[(a, b)];
                if v == Complex64::default() {
                    continue;
                }
                let (ea, eb) = (ext.embed[a], ext.embed[b]);
                for &(r, av) in &cols[ea] {
                    *acc.entry((r, eb)).or_default() += av * v;
                }
                for &(c, av) in &rows[eb] {
                    *acc.entry((ea, c)).or_default() -= v * av;
                }
            }
        }
        let norm2: f64 = acc.values().map(|z| z.norm_sqr()).sum();
        worst = worst.max(norm2.sqrt());
    }
    worst
}
