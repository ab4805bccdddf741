//! The permutation module `V` over `F_r` on projective points and the modules
//! derived from it: the trivial line `I = <t>`, the augmentation submodule
//! `V_0`, `V/I`, and `U = V_0/I`.
//!
//! Vectors are rows and every group element acts on the right through its
//! generator matrices: `v ↦ v·A(g)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::is_prime;
use crate::grp::{GroupCtx, GroupElem, ProjPoint};
use crate::linalg::{Echelon, Mat, Zp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModuleLabel {
    V,
    V0,
    VModI,
    U,
    Trivial,
    /// Any other sub- or quotient module.
    Derived,
}

impl ModuleLabel {
    pub fn name(self) -> &'static str {
        match self {
            ModuleLabel::V => "V",
            ModuleLabel::V0 => "V0",
            ModuleLabel::VModI => "V/I",
            ModuleLabel::U => "U",
            ModuleLabel::Trivial => "I",
            ModuleLabel::Derived => "derived",
        }
    }
}

impl fmt::Display for ModuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Coordinate vector over `F_r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModVec(pub Vec<u8>);

impl ModVec {
    pub fn zero(dim: usize) -> Self {
        ModVec(vec![0; dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &ModVec, f: &Zp) -> ModVec {
        ModVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &ModVec, f: &Zp) -> ModVec {
        ModVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f.sub(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: u8, f: &Zp) -> ModVec {
        ModVec(self.0.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Sum of coordinates.
    pub fn augmentation(&self, f: &Zp) -> u8 {
        self.0.iter().fold(0, |acc, &a| f.add(acc, a))
    }
}

/// A finite-dimensional `F_r`-module given by one action matrix per group generator.
#[derive(Debug, Clone)]
pub struct ModuleSpec {
    field: Zp,
    dim: usize,
    label: ModuleLabel,
    actions: Vec<Mat>,
}

impl ModuleSpec {
    pub fn new(r: u8, label: ModuleLabel, actions: Vec<Mat>) -> Result<Self> {
        let dim = actions.first().map_or(0, |a| a.rows());
        let field = Zp::new(r);
        for (i, a) in actions.iter().enumerate() {
            if a.rows() != dim || a.cols() != dim || a.inverse(&field).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "action matrix {i} is not an invertible {dim}x{dim} matrix"
                )));
            }
        }
        Ok(ModuleSpec {
            field,
            dim,
            label,
            actions,
        })
    }

    /// The trivial one-dimensional module for a group with `ngens` generators.
    pub fn trivial(r: u8, ngens: usize) -> Self {
        ModuleSpec {
            field: Zp::new(r),
            dim: 1,
            label: ModuleLabel::Trivial,
            actions: vec![Mat::identity(1); ngens],
        }
    }

    pub fn r(&self) -> u8 {
        self.field.modulus()
    }

    pub fn field(&self) -> &Zp {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> ModuleLabel {
        self.label
    }

    pub fn num_generators(&self) -> usize {
        self.actions.len()
    }

    pub fn action(&self, gen: usize) -> &Mat {
        &self.actions[gen]
    }

    pub fn actions(&self) -> &[Mat] {
        &self.actions
    }

    /// `v · s_gen`.
    pub fn act(&self, v: &ModVec, gen: usize) -> ModVec {
        ModVec(self.actions[gen].vec_mul(&v.0, &self.field))
    }

    /// Action matrix of the product of generators in `word`, left to right.
    pub fn word_action(&self, word: &[usize]) -> Mat {
        word.iter().fold(Mat::identity(self.dim), |acc, &g| {
            acc.mul(&self.actions[g], &self.field)
        })
    }
}

/// Permutation matrix of `x ↦ x·g` on `points`, over `F_r`.
pub fn permutation_matrix(ctx: &GroupCtx, points: &[ProjPoint], g: &GroupElem) -> Mat {
    let perm = ctx.point_permutation(points, g);
    let mut m = Mat::zeros(points.len(), points.len());
    for (i, &j) in perm.iter().enumerate() {
        m.set(i, j, 1);
    }
    m
}

/// Permutation module on projective points. Scalars act trivially on points,
/// so the same matrices serve any central quotient of `SL_n(q)`.
pub fn module_v(ctx: &GroupCtx, r: u64) -> Result<ModuleSpec> {
    let d = ctx.center_order();
    if !is_prime(r) || d % r != 0 || r > 255 {
        return Err(Error::InvalidR { r, d });
    }
    let points = ctx.proj_points();
    let actions = ctx
        .generators()
        .iter()
        .map(|g| permutation_matrix(ctx, &points, g))
        .collect();
    Ok(ModuleSpec {
        field: Zp::new(r as u8),
        dim: points.len(),
        label: ModuleLabel::V,
        actions,
    })
}

/// The all-ones vector `t` spanning `I`, in the coordinates of `V` or of the
/// `V_0` basis `{x_i - x_0}` (where it is again all ones, since
/// `Σ_{i≥1} (x_i - x_0) = t - dim(V)·x_0` and `r | dim(V)`).
pub fn t_vector(spec: &ModuleSpec) -> Result<ModVec> {
    match spec.label {
        ModuleLabel::V | ModuleLabel::V0 => Ok(ModVec(vec![1; spec.dim])),
        other => Err(Error::WrongLabel {
            expected: "V",
            actual: other.name(),
        }),
    }
}

/// Augmentation submodule `V_0` in the basis `{x_i - x_0 : i ≥ 1}`.
pub fn submodule_v0(spec: &ModuleSpec) -> Result<ModuleSpec> {
    if spec.label != ModuleLabel::V {
        return Err(Error::WrongLabel {
            expected: "V",
            actual: spec.label.name(),
        });
    }
    let basis: Vec<ModVec> = (1..spec.dim)
        .map(|i| {
            let mut v = vec![0u8; spec.dim];
            v[i] = 1;
            v[0] = spec.field.neg(1);
            ModVec(v)
        })
        .collect();
    let mut out = change_basis(spec, &basis)?.submodule;
    out.label = ModuleLabel::V0;
    Ok(out)
}

/// Quotient by the span of `sub_basis`, which must be invariant. The
/// complement is built by appending standard basis vectors that raise the
/// rank, in index order.
pub fn quotient(spec: &ModuleSpec, sub_basis: &[ModVec]) -> Result<ModuleSpec> {
    let mut out = change_basis(spec, sub_basis)?.quotient;
    out.label = match spec.label {
        ModuleLabel::V => ModuleLabel::VModI,
        ModuleLabel::V0 => ModuleLabel::U,
        _ => ModuleLabel::Derived,
    };
    Ok(out)
}

struct Split {
    submodule: ModuleSpec,
    quotient: ModuleSpec,
}

fn change_basis(spec: &ModuleSpec, sub_basis: &[ModVec]) -> Result<Split> {
    let f = &spec.field;
    let dim = spec.dim;
    let mut ech = Echelon::new(dim);
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(dim);
    for v in sub_basis {
        if v.len() != dim || !ech.insert(v.0.clone(), f) {
            return Err(Error::InvalidArgument(
                "subspace basis vectors must be independent and of module dimension".into(),
            ));
        }
        rows.push(v.0.clone());
    }
    let k = rows.len();
    for i in 0..dim {
        let mut e = vec![0u8; dim];
        e[i] = 1;
        if ech.insert(e.clone(), f) {
            rows.push(e);
        }
    }
    let b = Mat::from_rows(&rows, dim);
    let binv = b.inverse(f).expect("completed basis is invertible");
    let mut sub_actions = Vec::with_capacity(spec.actions.len());
    let mut quo_actions = Vec::with_capacity(spec.actions.len());
    for (gi, a) in spec.actions.iter().enumerate() {
        let m = b.mul(a, f).mul(&binv, f);
        for i in 0..k {
            if (k..dim).any(|j| m.get(i, j) != 0) {
                return Err(Error::NotInvariant { generator: gi });
            }
        }
        let mut s = Mat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                s.set(i, j, m.get(i, j));
            }
        }
        let mut q = Mat::zeros(dim - k, dim - k);
        for i in k..dim {
            for j in k..dim {
                q.set(i - k, j - k, m.get(i, j));
            }
        }
        sub_actions.push(s);
        quo_actions.push(q);
    }
    Ok(Split {
        submodule: ModuleSpec {
            field: f.clone(),
            dim: k,
            label: ModuleLabel::Derived,
            actions: sub_actions,
        },
        quotient: ModuleSpec {
            field: f.clone(),
            dim: dim - k,
            label: ModuleLabel::Derived,
            actions: quo_actions,
        },
    })
}

/// Basis of the fixed vectors `{v : v·A(g) = v for all generators g}`.
pub fn fixed_subspace(spec: &ModuleSpec) -> Vec<ModVec> {
    let f = &spec.field;
    let dim = spec.dim;
    let mut ech = Echelon::new(dim);
    // v·(A - 1) = 0 for each A; the rows here are the columns of A - 1.
    for a in &spec.actions {
        for c in 0..dim {
            let mut row: Vec<u8> = (0..dim).map(|i| a.get(i, c)).collect();
            row[c] = f.sub(row[c], 1);
            ech.insert(row, f);
        }
    }
    ech.nullspace(f).into_iter().map(ModVec).collect()
}

/// `V`, `V_0`, `V/I`, `U` and the trivial module `I` for one group context.
#[derive(Debug, Clone)]
pub struct PermutationModules {
    pub v: ModuleSpec,
    pub v0: ModuleSpec,
    pub v_mod_i: ModuleSpec,
    pub u: ModuleSpec,
    pub trivial: ModuleSpec,
}

impl PermutationModules {
    pub fn build(ctx: &GroupCtx, r: u64) -> Result<Self> {
        let v = module_v(ctx, r)?;
        let t = t_vector(&v)?;
        let v0 = submodule_v0(&v)?;
        let t0 = t_vector(&v0)?;
        let u = quotient(&v0, &[t0])?;
        let v_mod_i = quotient(&v, &[t])?;
        let trivial = ModuleSpec::trivial(r as u8, ctx.generators().len());
        Ok(PermutationModules {
            v,
            v0,
            v_mod_i,
            u,
            trivial,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::field_make;

    fn psl(p: u64, k: u32, n: usize) -> GroupCtx {
        GroupCtx::psl(field_make(p, k).unwrap(), n).unwrap()
    }

    #[test]
    fn permutation_module_shapes() {
        let v = module_v(&psl(7, 1, 2), 2).unwrap();
        assert_eq!(v.dim(), 8);
        let v = module_v(&psl(2, 2, 3), 3).unwrap();
        assert_eq!(v.dim(), 21);
        assert_eq!(v.dim() % 3, 0);
        assert_eq!(
            module_v(&psl(7, 1, 2), 3).unwrap_err(),
            Error::InvalidR { r: 3, d: 2 }
        );
        for a in v.actions() {
            for i in 0..v.dim() {
                assert_eq!(a.row(i).iter().filter(|&&x| x == 1).count(), 1);
                assert_eq!((0..v.dim()).filter(|&j| a.get(j, i) == 1).count(), 1);
                assert!(a.row(i).iter().all(|&x| x <= 1));
            }
        }
    }

    #[test]
    fn t_vector_is_fixed_and_augmented_to_zero() {
        let v = module_v(&psl(5, 1, 2), 2).unwrap();
        let t = t_vector(&v).unwrap();
        assert_eq!(t.0, vec![1; 6]);
        for g in 0..v.num_generators() {
            assert_eq!(v.act(&t, g), t);
        }
        assert_eq!(t.augmentation(v.field()), 0);
        let v0 = submodule_v0(&v).unwrap();
        assert!(matches!(
            t_vector(&quotient(&v0, &[t_vector(&v0).unwrap()]).unwrap()),
            Err(Error::WrongLabel { .. })
        ));
    }

    #[test]
    fn v0_dimensions_and_t_coordinates() {
        let v = module_v(&psl(5, 1, 2), 2).unwrap();
        assert_eq!(submodule_v0(&v).unwrap().dim(), 5);
        let v = module_v(&psl(2, 2, 3), 3).unwrap();
        let v0 = submodule_v0(&v).unwrap();
        assert_eq!(v0.dim(), 20);
        // Expand the V0 coordinates of t back into V: Σ c_i (x_i - x_0).
        let f = v.field();
        let c = t_vector(&v0).unwrap();
        let mut expanded = vec![0u8; v.dim()];
        for (i, &ci) in c.0.iter().enumerate() {
            expanded[i + 1] = f.add(expanded[i + 1], ci);
            expanded[0] = f.sub(expanded[0], ci);
        }
        assert_eq!(expanded, t_vector(&v).unwrap().0);
        assert!(submodule_v0(&v0).is_err());
    }

    #[test]
    fn quotient_dimensions() {
        let m = PermutationModules::build(&psl(2, 2, 3), 3).unwrap();
        assert_eq!(m.u.dim(), 19);
        assert_eq!(m.u.dim(), m.v.dim() - 2);
        assert_eq!(m.u.label(), ModuleLabel::U);
        let m = PermutationModules::build(&psl(5, 1, 2), 2).unwrap();
        assert_eq!(m.v_mod_i.dim(), 5);
        assert_eq!(m.v_mod_i.label(), ModuleLabel::VModI);
    }

    #[test]
    fn quotient_by_non_invariant_line_fails() {
        let v = module_v(&psl(5, 1, 2), 2).unwrap();
        let mut e0 = vec![0u8; v.dim()];
        e0[0] = 1;
        assert!(matches!(
            quotient(&v, &[ModVec(e0)]),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn fixed_subspaces() {
        let m = PermutationModules::build(&psl(5, 1, 2), 2).unwrap();
        assert_eq!(fixed_subspace(&m.v), vec![ModVec(vec![1; 6])]);
        assert_eq!(fixed_subspace(&m.trivial).len(), 1);
        let m = PermutationModules::build(&psl(2, 2, 3), 3).unwrap();
        assert_eq!(fixed_subspace(&m.v).len(), 1);
        assert!(fixed_subspace(&m.v_mod_i).is_empty());
        assert!(fixed_subspace(&m.u).is_empty());
    }

    #[test]
    fn action_is_a_homomorphism_on_generator_pairs() {
        let ctx = psl(3, 2, 2);
        let v = module_v(&ctx, 2).unwrap();
        let points = ctx.proj_points();
        let gens = ctx.generators();
        for i in 0..gens.len() {
            for j in 0..gens.len() {
                let prod = ctx.mul(&gens[i], &gens[j]);
                let direct = permutation_matrix(&ctx, &points, &prod);
                assert_eq!(v.word_action(&[i, j]), direct);
            }
        }
    }

    #[test]
    fn derived_modules_are_modules() {
        let m = PermutationModules::build(&psl(2, 2, 3), 3).unwrap();
        for spec in [&m.v0, &m.u, &m.v_mod_i] {
            assert!(ModuleSpec::new(spec.r(), spec.label(), spec.actions().to_vec()).is_ok());
        }
    }
}
