//! Central quotients `SL_n(q)/K` of special linear groups and their right
//! action on the points of projective space.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{gcd, Field, FieldElem};

/// Default number of elements `enumerate` will produce before giving up.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 2_000_000;

/// An `n x n` matrix of determinant 1, canonical modulo the scalar kernel of
/// its context. Entries are row-major field encodings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElem(Vec<FieldElem>);

impl GroupElem {
    pub fn entries(&self) -> &[FieldElem] {
        &self.0
    }

    /// Rows of the matrix.
    pub fn to_rows(&self, n: usize) -> Vec<Vec<FieldElem>> {
        self.0.chunks(n).map(|r| r.to_vec()).collect()
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = (self.0.len() as f64).sqrt().round() as usize;
        write!(f, "[")?;
        for (i, row) in self.0.chunks(n.max(1)).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

/// A point of `P^{n-1}(q)`: a row vector whose first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjPoint(Vec<FieldElem>);

impl ProjPoint {
    pub fn coords(&self) -> &[FieldElem] {
        &self.0
    }
}

/// `SL_n(q)/K` where `K` is the group of scalar matrices `λI` with `λ^m = 1`.
#[derive(Debug, Clone)]
pub struct GroupCtx {
    field: Field,
    n: usize,
    m: u64,
    scalars: Vec<FieldElem>,
    generators: Vec<GroupElem>,
}

impl GroupCtx {
    /// `m` must divide `gcd(n, q - 1)`.
    pub fn new(field: Field, n: usize, m: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("dimension {n} < 2")));
        }
        let d = gcd(n as u64, field.order() as u64 - 1);
        if m == 0 || d % m != 0 {
            return Err(Error::InvalidArgument(format!(
                "kernel order {m} does not divide gcd(n, q - 1) = {d}"
            )));
        }
        let zeta = field.element_of_order(m)?;
        let mut scalars: Vec<FieldElem> = (0..m).map(|e| field.pow(zeta, e)).collect();
        scalars.sort_unstable();
        let mut ctx = GroupCtx {
            field,
            n,
            m,
            scalars,
            generators: Vec::new(),
        };
        ctx.generators = ctx.sl_generators();
        Ok(ctx)
    }

    pub fn sl(field: Field, n: usize) -> Result<Self> {
        GroupCtx::new(field, n, 1)
    }

    pub fn psl(field: Field, n: usize) -> Result<Self> {
        let d = gcd(n as u64, field.order() as u64 - 1);
        GroupCtx::new(field, n, d)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Order of the scalar kernel `K`.
    pub fn kernel_order(&self) -> u64 {
        self.m
    }

    /// `gcd(n, q - 1)`, the order of the full scalar center of `SL_n(q)`.
    pub fn center_order(&self) -> u64 {
        gcd(self.n as u64, self.field.order() as u64 - 1)
    }

    pub fn is_psl(&self) -> bool {
        self.m == self.center_order()
    }

    pub fn generators(&self) -> &[GroupElem] {
        &self.generators
    }

    /// Scalars `λ` with `λI ∈ K`, sorted by encoding.
    pub fn kernel_scalars(&self) -> &[FieldElem] {
        &self.scalars
    }

    /// Closed-form `|SL_n(q)| / m`.
    pub fn order(&self) -> u128 {
        let q = self.field.order() as u128;
        let n = self.n as u32;
        let mut total = q.saturating_pow(n * (n - 1) / 2);
        for i in 2..=n {
            total = total.saturating_mul(q.saturating_pow(i) - 1);
        }
        total / self.m as u128
    }

    /// Lexicographically smallest scalar multiple `λM`, `λ ∈ K`.
    pub fn canonical(&self, entries: Vec<FieldElem>) -> GroupElem {
        if self.m == 1 {
            return GroupElem(entries);
        }
        let mut best = entries.clone();
        let mut cand = vec![0; entries.len()];
        for &lam in &self.scalars {
            if lam == 1 {
                continue;
            }
            for (c, &e) in cand.iter_mut().zip(&entries) {
                *c = self.field.mul(lam, e);
            }
            if cand < best {
                best.copy_from_slice(&cand);
            }
        }
        GroupElem(best)
    }

    /// Canonical image of an arbitrary determinant-1 matrix given row-major.
    pub fn element(&self, entries: Vec<FieldElem>) -> Result<GroupElem> {
        if entries.len() != self.n * self.n || entries.iter().any(|&e| e >= self.field.order()) {
            return Err(Error::InvalidArgument("malformed matrix".into()));
        }
        let det = self.determinant(&entries);
        if det != 1 {
            return Err(Error::InvalidArgument(format!("determinant {det} != 1")));
        }
        Ok(self.canonical(entries))
    }

    pub fn diag(&self, diagonal: &[FieldElem]) -> Result<GroupElem> {
        let n = self.n;
        if diagonal.len() != n {
            return Err(Error::InvalidArgument("diagonal length mismatch".into()));
        }
        let mut e = vec![0; n * n];
        for (i, &d) in diagonal.iter().enumerate() {
            e[i * n + i] = d;
        }
        self.element(e)
    }

    /// Image in this context of an element of another quotient of the same `SL_n(q)`.
    pub fn project(&self, g: &GroupElem) -> GroupElem {
        self.canonical(g.0.clone())
    }

    pub fn determinant(&self, entries: &[FieldElem]) -> FieldElem {
        let f = &self.field;
        let n = self.n;
        let mut a = entries.to_vec();
        let mut det = 1;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return 0;
            };
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = f.neg(det);
            }
            let p = a[col * n + col];
            det = f.mul(det, p);
            let pinv = f.inv(p).expect("nonzero pivot");
            for r in col + 1..n {
                let c = f.mul(a[r * n + col], pinv);
                if c == 0 {
                    continue;
                }
                for j in col..n {
                    let s = f.mul(c, a[col * n + j]);
                    a[r * n + j] = f.sub(a[r * n + j], s);
                }
            }
        }
        det
    }

    pub fn identity(&self) -> GroupElem {
        let n = self.n;
        let mut e = vec![0; n * n];
        for i in 0..n {
            e[i * n + i] = 1;
        }
        self.canonical(e)
    }

    fn raw_mul(&self, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
        let f = &self.field;
        let n = self.n;
        let mut out = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = a[i * n + k];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    let y = b[k * n + j];
                    if y != 0 {
                        out[i * n + j] = f.add(out[i * n + j], f.mul(x, y));
                    }
                }
            }
        }
        out
    }

    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        self.canonical(self.raw_mul(&a.0, &b.0))
    }

    /// Inverse by Gauss–Jordan elimination.
    pub fn inv(&self, a: &GroupElem) -> GroupElem {
        let f = &self.field;
        let n = self.n;
        let mut m = a.0.clone();
        let mut out: Vec<FieldElem> = (0..n * n).map(|i| u32::from(i / n == i % n)).collect();
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| m[r * n + col] != 0)
                .expect("determinant-1 matrix is invertible");
            if piv != col {
                for j in 0..n {
                    m.swap(piv * n + j, col * n + j);
                    out.swap(piv * n + j, col * n + j);
                }
            }
            let s = f.inv(m[col * n + col]).expect("nonzero pivot");
            for j in 0..n {
                m[col * n + j] = f.mul(m[col * n + j], s);
                out[col * n + j] = f.mul(out[col * n + j], s);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let c = m[r * n + col];
                if c == 0 {
                    continue;
                }
                for j in 0..n {
                    m[r * n + j] = f.sub(m[r * n + j], f.mul(c, m[col * n + j]));
                    out[r * n + j] = f.sub(out[r * n + j], f.mul(c, out[col * n + j]));
                }
            }
        }
        self.canonical(out)
    }

    pub fn pow(&self, a: &GroupElem, mut e: u64) -> GroupElem {
        let mut base = a.clone();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self, a: &GroupElem) -> bool {
        *a == self.identity()
    }

    /// Order of `a` in `SL_n(q)/K`.
    pub fn elem_order(&self, a: &GroupElem) -> u64 {
        let id = self.identity();
        let mut cur = a.clone();
        let mut k = 1;
        while cur != id {
            cur = self.mul(&cur, a);
            k += 1;
        }
        k
    }

    /// If `a` is (the class of) a scalar matrix, its canonical diagonal entry.
    pub fn scalar_value(&self, a: &GroupElem) -> Option<FieldElem> {
        let n = self.n;
        let lam = a.0[0];
        let scalar = (0..n * n).all(|i| {
            let expected = if i / n == i % n { lam } else { 0 };
            a.0[i] == expected
        });
        scalar.then_some(lam)
    }

    /// Elementary transvections `e_ij(β)` for `i != j` and `β` in the
    /// coefficient basis `{1, x, ..., x^{k-1}}`, ordered by `(i, j)` then `β`.
    pub fn sl_generators(&self) -> Vec<GroupElem> {
        let n = self.n;
        let p = self.field.p();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut beta = 1u32;
                for _ in 0..self.field.k() {
                    let mut e = vec![0; n * n];
                    for t in 0..n {
                        e[t * n + t] = 1;
                    }
                    e[i * n + j] = beta;
                    out.push(self.canonical(e));
                    beta *= p;
                }
            }
        }
        out
    }

    /// Breadth-first enumeration from the identity over the generators.
    pub fn enumerate(&self, budget: usize) -> Result<Enumeration> {
        let order = self.order();
        if order > budget as u128 {
            return Err(Error::BudgetExceeded { order, budget });
        }
        let ngens = self.generators.len();
        let id = self.identity();
        let mut elements = vec![id.clone()];
        let mut index = HashMap::with_capacity(order as usize);
        index.insert(id, 0u32);
        let mut right = Vec::with_capacity(order as usize * ngens);
        let mut parent = vec![(ROOT, 0u32)];
        let mut layer_starts = vec![0usize, 1];
        let mut cursor = 0;
        while cursor < elements.len() {
            if cursor == *layer_starts.last().unwrap() && cursor != 0 {
                layer_starts.push(elements.len());
            }
            for (gi, gen) in self.generators.iter().enumerate() {
                let prod = self.mul(&elements[cursor], gen);
                let idx = match index.get(&prod) {
                    Some(&i) => i,
                    None => {
                        let i = elements.len() as u32;
                        if elements.len() >= budget {
                            return Err(Error::BudgetExceeded { order, budget });
                        }
                        index.insert(prod.clone(), i);
                        elements.push(prod);
                        parent.push((cursor as u32, gi as u32));
                        i
                    }
                };
                right.push(idx);
            }
            cursor += 1;
        }
        if *layer_starts.last().unwrap() != elements.len() {
            layer_starts.push(elements.len());
        }
        debug_assert_eq!(elements.len() as u128, order);
        Ok(Enumeration {
            elements,
            index,
            ngens,
            right,
            parent,
            layer_starts,
        })
    }

    /// All normalized points, sorted by coordinate encodings.
    pub fn proj_points(&self) -> Vec<ProjPoint> {
        let q = self.field.order();
        let n = self.n;
        let mut out = Vec::with_capacity(self.num_points());
        for lead in (0..n).rev() {
            let tail = n - 1 - lead;
            let count = (q as usize).pow(tail as u32);
            for idx in 0..count {
                let mut coords = vec![0; n];
                coords[lead] = 1;
                let mut rest = idx;
                for j in (lead + 1..n).rev() {
                    coords[j] = (rest % q as usize) as u32;
                    rest /= q as usize;
                }
                out.push(ProjPoint(coords));
            }
        }
        out
    }

    pub fn num_points(&self) -> usize {
        let q = self.field.order() as usize;
        (0..self.n).map(|i| q.pow(i as u32)).sum()
    }

    /// Position of a normalized point in `proj_points` order.
    pub fn point_index(&self, x: &ProjPoint) -> usize {
        let q = self.field.order() as usize;
        let n = self.n;
        let lead = x.0.iter().position(|&c| c != 0).expect("nonzero point");
        // Blocks with more leading zeros come first.
        let before: usize = (0..n - 1 - lead).map(|t| q.pow(t as u32)).sum();
        let within = x.0[lead + 1..]
            .iter()
            .fold(0usize, |acc, &c| acc * q + c as usize);
        before + within
    }

    pub fn normalize(&self, mut v: Vec<FieldElem>) -> Option<ProjPoint> {
        let lead = v.iter().position(|&c| c != 0)?;
        let s = self.field.inv(v[lead])?;
        for c in v.iter_mut() {
            *c = self.field.mul(*c, s);
        }
        Some(ProjPoint(v))
    }

    pub fn point(&self, coords: Vec<FieldElem>) -> Result<ProjPoint> {
        if coords.len() != self.n || coords.iter().any(|&c| c >= self.field.order()) {
            return Err(Error::InvalidArgument("malformed point".into()));
        }
        let p = self
            .normalize(coords.clone())
            .ok_or_else(|| Error::InvalidArgument("zero vector is not a point".into()))?;
        if p.0 != coords {
            return Err(Error::InvalidArgument("point is not normalized".into()));
        }
        Ok(p)
    }

    /// Right action `x ↦ x·g` on row vectors, normalized.
    pub fn act(&self, x: &ProjPoint, g: &GroupElem) -> ProjPoint {
        let f = &self.field;
        let n = self.n;
        let mut y = vec![0; n];
        for (i, &xi) in x.0.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = f.add(*yj, f.mul(xi, g.0[i * n + j]));
            }
        }
        self.normalize(y)
            .expect("invertible matrix maps points to points")
    }

    /// The permutation `i ↦ index(act(point_i, g))` of point indices.
    pub fn point_permutation(&self, points: &[ProjPoint], g: &GroupElem) -> Vec<usize> {
        points
            .iter()
            .map(|x| self.point_index(&self.act(x, g)))
            .collect()
    }

    pub fn fixed_points(&self, g: &GroupElem) -> Vec<ProjPoint> {
        self.proj_points()
            .into_iter()
            .filter(|x| self.act(x, g) == *x)
            .collect()
    }

    /// `|H / H'|` for the stabilizer `H` of `x`.
    pub fn stabilizer_abelianization_order(&self, x: &ProjPoint, budget: usize) -> Result<u64> {
        if !self.is_psl() {
            return Err(Error::InvalidArgument(
                "stabilizer abelianization is defined on PSL contexts".into(),
            ));
        }
        let all = self.enumerate(budget)?;
        let stab: Vec<&GroupElem> = all
            .elements
            .iter()
            .filter(|g| self.act(x, g) == *x)
            .collect();
        let invs: Vec<GroupElem> = stab.iter().map(|g| self.inv(g)).collect();
        let mut commutators: HashSet<GroupElem> = HashSet::new();
        for (a, ai) in stab.iter().zip(&invs) {
            for (b, bi) in stab.iter().zip(&invs) {
                let c = self.mul(&self.mul(ai, bi), &self.mul(a, b));
                commutators.insert(c);
            }
        }
        let gens: Vec<GroupElem> = commutators.into_iter().collect();
        let mut derived: HashSet<GroupElem> = HashSet::new();
        let id = self.identity();
        derived.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(g) = queue.pop_front() {
            for s in &gens {
                let h = self.mul(&g, s);
                if derived.insert(h.clone()) {
                    queue.push_back(h);
                }
            }
        }
        Ok((stab.len() / derived.len()) as u64)
    }
}

const ROOT: u32 = u32::MAX;

/// Elements of a group in BFS order together with the right-multiplication
/// table by generators and a spanning tree of generator words.
#[derive(Debug, Clone)]
pub struct Enumeration {
    elements: Vec<GroupElem>,
    index: HashMap<GroupElem, u32>,
    ngens: usize,
    right: Vec<u32>,
    parent: Vec<(u32, u32)>,
    layer_starts: Vec<usize>,
}

impl Enumeration {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn num_generators(&self) -> usize {
        self.ngens
    }

    pub fn elements(&self) -> &[GroupElem] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElem {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &GroupElem) -> Option<usize> {
        self.index.get(g).map(|&i| i as usize)
    }

    /// Index of `element(i) * generator(gen)`.
    #[inline]
    pub fn mul_gen(&self, i: usize, gen: usize) -> usize {
        self.right[i * self.ngens + gen] as usize
    }

    /// Tree edge that discovered element `i`, `None` for the identity.
    pub fn parent(&self, i: usize) -> Option<(usize, usize)> {
        let (p, g) = self.parent[i];
        (p != ROOT).then_some((p as usize, g as usize))
    }

    /// Generator word from the identity to element `i`.
    pub fn word(&self, mut i: usize) -> Vec<usize> {
        let mut w = Vec::new();
        while let Some((p, g)) = self.parent(i) {
            w.push(g);
            i = p;
        }
        w.reverse();
        w
    }

    /// Half-open index ranges of BFS layers.
    pub fn layers(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.layer_starts.windows(2).map(|w| w[0]..w[1])
    }
}
