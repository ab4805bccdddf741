//! 1-cocycles and 1-coboundaries of a finite group acting on the right of an
//! `F_r`-module, with the right-cocycle law `v(st) = v(s)·t + v(t)`.
//!
//! Two independent solvers are provided. [`z1_full_oracle`] writes out the
//! cocycle law for every pair of group elements and solves it directly; it is
//! only practical for small groups. [`z1_from_enumeration`] takes the values
//! on generators as unknowns, propagates them along a BFS spanning tree and
//! collects one consistency equation per non-tree edge.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grp::{Enumeration, GroupCtx, GroupElem};
use crate::linalg::{Echelon, Mat, SparseRref, Zp};
use crate::permmod::{fixed_subspace, ModVec, ModuleLabel, ModuleSpec};

pub const ORACLE_ORDER_BUDGET: usize = 360;
pub const ORACLE_DIM_BUDGET: usize = 64;

/// A 1-cocycle, stored by its values on the group generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cocycle {
    pub gen_values: Vec<ModVec>,
}

impl Cocycle {
    pub fn zero(ngens: usize, dim: usize) -> Self {
        Cocycle {
            gen_values: vec![ModVec::zero(dim); ngens],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gen_values.iter().all(ModVec::is_zero)
    }

    pub fn add(&self, other: &Cocycle, f: &Zp) -> Cocycle {
        Cocycle {
            gen_values: self
                .gen_values
                .iter()
                .zip(&other.gen_values)
                .map(|(a, b)| a.add(b, f))
                .collect(),
        }
    }

    pub fn scale(&self, c: u8, f: &Zp) -> Cocycle {
        Cocycle {
            gen_values: self.gen_values.iter().map(|v| v.scale(c, f)).collect(),
        }
    }

    /// Value on the product of generators in `word`.
    pub fn eval_word(&self, module: &ModuleSpec, word: &[usize]) -> ModVec {
        let f = module.field();
        word.iter().fold(ModVec::zero(module.dim()), |acc, &s| {
            module.act(&acc, s).add(&self.gen_values[s], f)
        })
    }

    /// Value on element `idx` of `en`, via its spanning-tree word.
    pub fn eval(&self, en: &Enumeration, module: &ModuleSpec, idx: usize) -> ModVec {
        self.eval_word(module, &en.word(idx))
    }

    /// Values on all elements in BFS order, extended along the spanning tree.
    pub fn values(&self, en: &Enumeration, module: &ModuleSpec) -> Vec<ModVec> {
        let f = module.field();
        let mut out = Vec::with_capacity(en.len());
        out.push(ModVec::zero(module.dim()));
        for i in 1..en.len() {
            let (p, s) = en.parent(i).expect("non-root element has a parent");
            let v = module.act(&out[p], s).add(&self.gen_values[s], f);
            out.push(v);
        }
        out
    }

    /// Checks `v(g·s) = v(g)·s + v(s)` for every element `g` and generator
    /// `s`; returns the first failing `(g, s)`.
    pub fn check(
        &self,
        en: &Enumeration,
        module: &ModuleSpec,
    ) -> std::result::Result<(), (usize, usize)> {
        let f = module.field();
        let vals = self.values(en, module);
        for g in 0..en.len() {
            for s in 0..en.num_generators() {
                let rhs = module.act(&vals[g], s).add(&self.gen_values[s], f);
                if vals[en.mul_gen(g, s)] != rhs {
                    return Err((g, s));
                }
            }
        }
        Ok(())
    }
}

/// A basis of `Z^1` together with the dimensions of `Z^1`, `B^1` and `H^1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CocycleBasis {
    pub module: ModuleLabel,
    pub cocycles: Vec<Cocycle>,
    pub z1_dim: usize,
    pub b1_dim: usize,
    pub h1_dim: usize,
}

impl CocycleBasis {
    fn new(module: &ModuleSpec, cocycles: Vec<Cocycle>) -> Self {
        let z1_dim = cocycles.len();
        let b1_dim = module.dim() - fixed_subspace(module).len();
        CocycleBasis {
            module: module.label(),
            cocycles,
            z1_dim,
            b1_dim,
            h1_dim: z1_dim - b1_dim,
        }
    }
}

/// Full multiplication table and per-element action matrices of a small group.
#[derive(Debug, Clone)]
pub struct GroupTable {
    order: usize,
    mul: Vec<u32>,
    actions: Vec<Mat>,
    generators: Vec<usize>,
}

impl GroupTable {
    /// `mul[a * order + b]` is the index of `a·b`; `generators` lists the
    /// element indices of the generators in module order.
    pub fn new(order: usize, mul: Vec<u32>, actions: Vec<Mat>, generators: Vec<usize>) -> Self {
        assert_eq!(mul.len(), order * order);
        assert_eq!(actions.len(), order);
        GroupTable {
            order,
            mul,
            actions,
            generators,
        }
    }

    /// Multiplies elements as matrices and builds each action matrix from its
    /// parent's along the spanning tree.
    pub fn from_group(ctx: &GroupCtx, en: &Enumeration, module: &ModuleSpec) -> Self {
        let f = module.field();
        let order = en.len();
        let lookup: HashMap<&GroupElem, u32> = en
            .elements()
            .iter()
            .enumerate()
            .map(|(i, g)| (g, i as u32))
            .collect();
        let mut mul = Vec::with_capacity(order * order);
        for a in en.elements() {
            for b in en.elements() {
                mul.push(lookup[&ctx.mul(a, b)]);
            }
        }
        let mut actions = vec![Mat::identity(module.dim())];
        for i in 1..order {
            let (p, s) = en.parent(i).expect("non-root element has a parent");
            let m = actions[p].mul(module.action(s), f);
            actions.push(m);
        }
        let generators = (0..en.num_generators()).map(|s| en.mul_gen(0, s)).collect();
        GroupTable {
            order,
            mul,
            actions,
            generators,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// Solves the cocycle law over all pairs of elements.
pub fn z1_full_oracle(table: &GroupTable, module: &ModuleSpec) -> Result<CocycleBasis> {
    z1_full_oracle_with_budget(table, module, ORACLE_ORDER_BUDGET, ORACLE_DIM_BUDGET)
}

pub fn z1_full_oracle_with_budget(
    table: &GroupTable,
    module: &ModuleSpec,
    max_order: usize,
    max_dim: usize,
) -> Result<CocycleBasis> {
    if table.order > max_order {
        return Err(Error::BudgetExceeded {
            order: table.order as u128,
            budget: max_order,
        });
    }
    if module.dim() > max_dim {
        return Err(Error::InvalidArgument(format!(
            "module dimension {} exceeds the oracle limit {max_dim}",
            module.dim()
        )));
    }
    let f = module.field();
    let dim = module.dim();
    let n = table.order;
    let var = |g: usize, c: usize| (g * dim + c) as u32;
    let mut sys = SparseRref::new(n * dim);
    let neg1 = f.neg(1);
    let mut row: Vec<(u32, u8)> = Vec::new();
    for s in 0..n {
        for t in 0..n {
            let st = table.mul[s * n + t] as usize;
            let at = &table.actions[t];
            for c in 0..dim {
                row.clear();
                row.push((var(st, c), 1));
                row.push((var(t, c), neg1));
                for i in 0..dim {
                    let a = at.get(i, c);
                    if a != 0 {
                        row.push((var(s, i), f.neg(a)));
                    }
                }
                sys.insert(&row, f);
            }
        }
    }
    let cocycles = sys
        .nullspace(f)
        .into_iter()
        .map(|x| Cocycle {
            gen_values: table
                .generators
                .iter()
                .map(|&g| ModVec(x[g * dim..(g + 1) * dim].to_vec()))
                .collect(),
        })
        .collect();
    Ok(CocycleBasis::new(module, cocycles))
}

/// Enumerates the group and runs [`z1_from_enumeration`].
pub fn z1_generator_method(
    ctx: &GroupCtx,
    module: &ModuleSpec,
    budget: usize,
) -> Result<CocycleBasis> {
    let en = ctx.enumerate(budget)?;
    Ok(z1_from_enumeration(&en, module))
}

/// Cocycle values on every discovered element, as linear forms in the current
/// free parameters. Parameters are eliminated in batches: violated
/// consistency equations are collected in `pending` and the stored forms are
/// re-expressed on the reduced parameter space when the batch is large, at
/// the end of each BFS layer, and at the end.
struct Propagation<'a> {
    f: &'a Zp,
    dim: usize,
    /// Current number of free parameters.
    k: usize,
    /// Map from free parameters to the original unknowns, `(ngens·dim) x k`.
    basis: Vec<u8>,
    /// Per element, a `dim x k` block.
    vals: Vec<u8>,
    pending: Echelon,
}

impl Propagation<'_> {
    fn reproject(&mut self) {
        if self.pending.rank() == 0 {
            return;
        }
        let kernel = self.pending.nullspace(self.f);
        let k_new = kernel.len();
        let mut t = Mat::zeros(self.k, k_new);
        for (j, col) in kernel.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                t.set(i, j, x);
            }
        }
        let project = |data: &[u8]| -> Vec<u8> {
            let mut out = Vec::with_capacity(data.len() / self.k.max(1) * k_new);
            for row in data.chunks(self.k) {
                out.extend(t.vec_mul(row, self.f));
            }
            out
        };
        self.basis = project(&self.basis);
        self.vals = project(&self.vals);
        self.k = k_new;
        self.pending = Echelon::new(k_new);
    }
}

/// `Z^1` from the generator values, using the spanning tree and multiplication
/// table of `en`. Deterministic given the generator order.
pub fn z1_from_enumeration(en: &Enumeration, module: &ModuleSpec) -> CocycleBasis {
    let f = module.field();
    let dim = module.dim();
    let ngens = module.num_generators();
    assert_eq!(
        ngens,
        en.num_generators(),
        "module and group disagree on generators"
    );
    let unknowns = ngens * dim;

    // Sparse rows of each action matrix: row i lists (column, value).
    let sparse: Vec<Vec<Vec<(usize, u8)>>> = module
        .actions()
        .iter()
        .map(|a| {
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .filter(|&c| a.get(i, c) != 0)
                        .map(|c| (c, a.get(i, c)))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut st = Propagation {
        f,
        dim,
        k: unknowns,
        basis: (0..unknowns * unknowns)
            .map(|i| u8::from(i / unknowns == i % unknowns))
            .collect(),
        vals: vec![0; dim * unknowns],
        pending: Echelon::new(unknowns),
    };
    let mut block = Vec::new();
    let mut diff = Vec::new();

    'layers: for layer in en.layers() {
        for g in layer {
            for s in 0..ngens {
                if st.k == 0 {
                    break 'layers;
                }
                let k = st.k;
                let t = en.mul_gen(g, s);
                block.clear();
                block.resize(st.dim * k, 0);
                let pg = &st.vals[g * dim * k..(g + 1) * dim * k];
                for (i, entries) in sparse[s].iter().enumerate() {
                    let src = &pg[i * k..(i + 1) * k];
                    for &(c, a) in entries {
                        f.axpy(&mut block[c * k..(c + 1) * k], a, src);
                    }
                }
                for c in 0..dim {
                    let x = &st.basis[(s * dim + c) * k..(s * dim + c + 1) * k];
                    f.axpy(&mut block[c * k..(c + 1) * k], 1, x);
                }
                if en.parent(t) == Some((g, s)) {
                    debug_assert_eq!(st.vals.len(), t * dim * k);
                    st.vals.extend_from_slice(&block);
                } else {
                    let pt = &st.vals[t * dim * k..(t + 1) * dim * k];
                    for c in 0..dim {
                        diff.clear();
                        diff.extend_from_slice(&block[c * k..(c + 1) * k]);
                        f.axpy(&mut diff, f.neg(1), &pt[c * k..(c + 1) * k]);
                        if diff.iter().any(|&x| x != 0) {
                            st.pending.insert(diff.clone(), f);
                        }
                    }
                    if st.pending.rank() * 8 >= k {
                        st.reproject();
                    }
                }
            }
        }
        st.reproject();
    }
    st.reproject();

    let k = st.k;
    let cocycles = (0..k)
        .map(|j| Cocycle {
            gen_values: (0..ngens)
                .map(|s| ModVec((0..dim).map(|c| st.basis[(s * dim + c) * k + j]).collect()))
                .collect(),
        })
        .collect();
    CocycleBasis::new(module, cocycles)
}

/// Coboundaries `s ↦ w·s - w` for `w` running over a complement of the fixed
/// subspace (standard basis vectors completing it, in index order).
pub fn b1_basis(module: &ModuleSpec) -> Vec<Cocycle> {
    let f = module.field();
    let dim = module.dim();
    let mut ech = Echelon::new(dim);
    for v in fixed_subspace(module) {
        ech.insert(v.0, f);
    }
    let mut out = Vec::new();
    for i in 0..dim {
        let mut w = vec![0u8; dim];
        w[i] = 1;
        if !ech.insert(w.clone(), f) {
            continue;
        }
        let w = ModVec(w);
        out.push(Cocycle {
            gen_values: (0..module.num_generators())
                .map(|s| module.act(&w, s).sub(&w, f))
                .collect(),
        });
    }
    out
}

/// For a cocycle of the cover with values in `V`, the scalar `c` with
/// `v(z) = c·t`, where `z` generates the kernel of the cover onto `PSL`.
pub fn restrict_to_central(
    cocycle: &Cocycle,
    en: &Enumeration,
    ctx_cover: &GroupCtx,
    module: &ModuleSpec,
    z: &GroupElem,
) -> Result<u8> {
    if ctx_cover.scalar_value(z).is_none() {
        return Err(Error::NotCentralKernel(format!("{z} is not scalar")));
    }
    if ctx_cover.is_identity(z) {
        return Err(Error::NotCentralKernel("identity".into()));
    }
    let idx = en
        .index_of(z)
        .ok_or_else(|| Error::NotCentralKernel(format!("{z} is not in the enumerated cover")))?;
    let value = cocycle.eval(en, module, idx);
    let c = value.0.first().copied().unwrap_or(0);
    if value.0.iter().any(|&x| x != c) {
        return Err(Error::InvalidArgument(
            "cocycle value on the central kernel is not a multiple of t".into(),
        ));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::field_make;
    use crate::permmod::{module_v, PermutationModules};

    fn ctx(p: u64, k: u32, n: usize, m: u64) -> GroupCtx {
        GroupCtx::new(field_make(p, k).unwrap(), n, m).unwrap()
    }

    #[test]
    fn trivial_group_has_no_cocycles() {
        let module = ModuleSpec::trivial(3, 0);
        let table = GroupTable::new(1, vec![0], vec![Mat::identity(1)], vec![]);
        let basis = z1_full_oracle(&table, &module).unwrap();
        assert_eq!(basis.z1_dim, 0);
    }

    #[test]
    fn perfect_group_trivial_module() {
        let g = ctx(5, 1, 2, 2);
        let en = g.enumerate(1000).unwrap();
        let module = ModuleSpec::trivial(2, g.generators().len());
        let table = GroupTable::from_group(&g, &en, &module);
        assert_eq!(z1_full_oracle(&table, &module).unwrap().z1_dim, 0);
        assert_eq!(z1_from_enumeration(&en, &module).z1_dim, 0);
    }

    #[test]
    fn sl25_on_v_oracle() {
        let g = ctx(5, 1, 2, 1);
        let en = g.enumerate(1000).unwrap();
        let v = module_v(&g, 2).unwrap();
        let table = GroupTable::from_group(&g, &en, &v);
        let oracle = z1_full_oracle(&table, &v).unwrap();
        assert_eq!(oracle.b1_dim, 5);
        assert_eq!(oracle.z1_dim, oracle.b1_dim + oracle.h1_dim);
        let fast = z1_from_enumeration(&en, &v);
        assert_eq!(
            (fast.z1_dim, fast.b1_dim, fast.h1_dim),
            (oracle.z1_dim, oracle.b1_dim, oracle.h1_dim)
        );
    }

    #[test]
    fn oracle_budget() {
        let g = ctx(7, 1, 2, 1);
        let en = g.enumerate(1000).unwrap();
        let v = module_v(&g, 2).unwrap();
        let table = GroupTable::from_group(&g, &en, &v);
        assert!(matches!(
            z1_full_oracle_with_budget(&table, &v, 100, 64),
            Err(Error::BudgetExceeded { order: 336, .. })
        ));
    }

    #[test]
    fn psl2_h1_of_v() {
        let g = ctx(5, 1, 2, 2);
        assert_eq!(
            z1_generator_method(&g, &module_v(&g, 2).unwrap(), 1000)
                .unwrap()
                .h1_dim,
            1
        );
        let g = ctx(7, 1, 2, 2);
        assert_eq!(
            z1_generator_method(&g, &module_v(&g, 2).unwrap(), 1000)
                .unwrap()
                .h1_dim,
            0
        );
    }

    #[test]
    fn every_basis_cocycle_satisfies_the_law() {
        let g = ctx(3, 2, 2, 2);
        let en = g.enumerate(1000).unwrap();
        let mods = PermutationModules::build(&g, 2).unwrap();
        for m in [&mods.v, &mods.v0, &mods.u, &mods.v_mod_i] {
            let basis = z1_from_enumeration(&en, m);
            for c in &basis.cocycles {
                assert_eq!(c.check(&en, m), Ok(()));
            }
            for c in b1_basis(m) {
                assert_eq!(c.check(&en, m), Ok(()));
            }
            assert_eq!(b1_basis(m).len(), basis.b1_dim);
        }
    }

    #[test]
    fn coboundary_dimensions() {
        let g = ctx(5, 1, 2, 2);
        let v = module_v(&g, 2).unwrap();
        assert_eq!(b1_basis(&v).len(), 5);
        assert!(b1_basis(&ModuleSpec::trivial(2, 2)).is_empty());
    }

    #[test]
    fn broken_cocycle_is_detected() {
        let g = ctx(7, 1, 2, 2);
        let en = g.enumerate(1000).unwrap();
        let v = module_v(&g, 2).unwrap();
        let mut c = Cocycle::zero(2, v.dim());
        c.gen_values[0].0[0] = 1;
        assert!(c.check(&en, &v).is_err());
    }

    #[test]
    fn central_restriction() {
        let f = field_make(7, 1).unwrap();
        let cover = GroupCtx::sl(f, 2).unwrap();
        let en = cover.enumerate(1000).unwrap();
        let v = module_v(&cover, 2).unwrap();
        let z = cover.diag(&[6, 6]).unwrap();
        for c in b1_basis(&v) {
            assert_eq!(restrict_to_central(&c, &en, &cover, &v, &z), Ok(0));
        }
        let basis = z1_from_enumeration(&en, &v);
        let values: Vec<u8> = basis
            .cocycles
            .iter()
            .map(|c| restrict_to_central(c, &en, &cover, &v, &z).unwrap())
            .collect();
        assert!(values.contains(&1));
        assert!(matches!(
            restrict_to_central(&basis.cocycles[0], &en, &cover, &v, &cover.identity()),
            Err(Error::NotCentralKernel(_))
        ));
        assert!(matches!(
            restrict_to_central(&basis.cocycles[0], &en, &cover, &v, &cover.generators()[0]),
            Err(Error::NotCentralKernel(_))
        ));

        let f = field_make(5, 1).unwrap();
        let cover = GroupCtx::sl(f, 2).unwrap();
        let en = cover.enumerate(1000).unwrap();
        let v = module_v(&cover, 2).unwrap();
        let z = cover.diag(&[4, 4]).unwrap();
        for c in &z1_from_enumeration(&en, &v).cocycles {
            assert_eq!(restrict_to_central(c, &en, &cover, &v, &z), Ok(0));
        }
    }
}
