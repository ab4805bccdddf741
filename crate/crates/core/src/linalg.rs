//! Dense and sparse exact linear algebra over a small prime field `F_r`.

/// Prime field `F_r` with `r < 256`, backed by lookup tables.
#[derive(Debug, Clone)]
pub struct Zp {
    r: u8,
    mul: Vec<u8>,
    inv: Vec<u8>,
}

impl PartialEq for Zp {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r
    }
}

impl Eq for Zp {}

impl Zp {
    pub fn new(r: u8) -> Self {
        assert!(r >= 2, "modulus must be at least 2");
        let rr = r as usize;
        let mut mul = vec![0u8; rr * rr];
        let mut inv = vec![0u8; rr];
        for a in 0..rr {
            for b in 0..rr {
                mul[a * rr + b] = ((a * b) % rr) as u8;
                if (a * b) % rr == 1 {
                    inv[a] = b as u8;
                }
            }
        }
        Zp { r, mul, inv }
    }

    #[inline]
    pub fn modulus(&self) -> u8 {
        self.r
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        let s = a as u16 + b as u16;
        if s >= self.r as u16 {
            (s - self.r as u16) as u8
        } else {
            s as u8
        }
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.r - a
        }
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.r as usize + b as usize]
    }

    /// Inverse of a nonzero element.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    pub fn reduce(&self, a: i64) -> u8 {
        a.rem_euclid(self.r as i64) as u8
    }

    /// `dst += a * src`.
    #[inline]
    pub fn axpy(&self, dst: &mut [u8], a: u8, src: &[u8]) {
        if a == 0 {
            return;
        }
        let r = self.r;
        if r == 2 {
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= *s;
            }
            return;
        }
        let row = &self.mul[a as usize * r as usize..(a as usize + 1) * r as usize];
        for (d, &s) in dst.iter_mut().zip(src) {
            let v = *d + row[s as usize];
            *d = if v >= r { v - r } else { v };
        }
    }

    pub fn scale(&self, v: &mut [u8], a: u8) {
        for x in v.iter_mut() {
            *x = self.mul(*x, a);
        }
    }
}

/// Dense row-major matrix over `F_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        Mat {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u8] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &Mat, f: &Zp) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a != 0 {
                    let (src, dst) = (other.row(k), i);
                    let cols = out.cols;
                    f.axpy(&mut out.data[dst * cols..(dst + 1) * cols], a, src);
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[u8], f: &Zp) -> Vec<u8> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0u8; self.cols];
        for (i, &a) in v.iter().enumerate() {
            f.axpy(&mut out, a, self.row(i));
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn rank(&self, f: &Zp) -> usize {
        let mut e = Echelon::new(self.cols);
        (0..self.rows)
            .filter(|&i| e.insert(self.row(i).to_vec(), f))
            .count()
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn nullspace(&self, f: &Zp) -> Vec<Vec<u8>> {
        let mut e = Echelon::new(self.cols);
        for i in 0..self.rows {
            e.insert(self.row(i).to_vec(), f);
        }
        e.nullspace(f)
    }

    /// Basis of `{v : v * self = 0}`.
    pub fn left_nullspace(&self, f: &Zp) -> Vec<Vec<u8>> {
        self.transpose().nullspace(f)
    }

    pub fn inverse(&self, f: &Zp) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| a.get(r, col) != 0)?;
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let s = f.inv(a.get(col, col));
            f.scale(a.row_mut(col), s);
            f.scale(inv.row_mut(col), s);
            let (prow, pinv) = (a.row(col).to_vec(), inv.row(col).to_vec());
            for r in 0..n {
                if r != col {
                    let c = a.get(r, col);
                    if c != 0 {
                        let m = f.neg(c);
                        f.axpy(a.row_mut(r), m, &prow);
                        f.axpy(inv.row_mut(r), m, &pinv);
                    }
                }
            }
        }
        Some(inv)
    }
}

/// Incrementally built reduced row-echelon basis of a row space.
#[derive(Debug, Clone)]
pub struct Echelon {
    cols: usize,
    rows: Vec<Vec<u8>>,
    pivot_cols: Vec<usize>,
    pivot_of_col: Vec<Option<usize>>,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon {
            cols,
            rows: Vec::new(),
            pivot_cols: Vec::new(),
            pivot_of_col: vec![None; cols],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// Reduces `row` against the basis in place; afterwards it is zero on all pivot columns.
    pub fn reduce(&self, row: &mut [u8], f: &Zp) {
        for (idx, &pc) in self.pivot_cols.iter().enumerate() {
            let c = row[pc];
            if c != 0 {
                f.axpy(row, f.neg(c), &self.rows[idx]);
            }
        }
    }

    /// Adds `row` to the span; returns whether the rank grew.
    pub fn insert(&mut self, mut row: Vec<u8>, f: &Zp) -> bool {
        debug_assert_eq!(row.len(), self.cols);
        self.reduce(&mut row, f);
        let Some(pc) = row.iter().position(|&x| x != 0) else {
            return false;
        };
        let s = f.inv(row[pc]);
        f.scale(&mut row, s);
        for other in self.rows.iter_mut() {
            let c = other[pc];
            if c != 0 {
                f.axpy(other, f.neg(c), &row);
            }
        }
        self.pivot_of_col[pc] = Some(self.rows.len());
        self.pivot_cols.push(pc);
        self.rows.push(row);
        true
    }

    pub fn contains(&self, row: &[u8], f: &Zp) -> bool {
        let mut r = row.to_vec();
        self.reduce(&mut r, f);
        r.iter().all(|&x| x == 0)
    }

    /// Basis of the vectors annihilated by every row, one per free column in
    /// increasing column order.
    pub fn nullspace(&self, f: &Zp) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        for free in 0..self.cols {
            if self.pivot_of_col[free].is_some() {
                continue;
            }
            let mut x = vec![0u8; self.cols];
            x[free] = 1;
            for (idx, &pc) in self.pivot_cols.iter().enumerate() {
                x[pc] = f.neg(self.rows[idx][free]);
            }
            out.push(x);
        }
        out
    }
}

/// Reduced row-echelon form with sparse rows, for large sparse systems.
///
/// Every stored row has a unit at its pivot column and zeros at all other
/// pivot columns.
#[derive(Debug, Clone)]
pub struct SparseRref {
    cols: usize,
    rows: Vec<Vec<(u32, u8)>>,
    pivot_cols: Vec<u32>,
    pivot_of_col: Vec<u32>,
    /// Rows that may contain a nonzero at the column; may hold stale entries.
    occurs: Vec<Vec<u32>>,
    scratch: Vec<u8>,
    touched: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl SparseRref {
    pub fn new(cols: usize) -> Self {
        SparseRref {
            cols,
            rows: Vec::new(),
            pivot_cols: Vec::new(),
            pivot_of_col: vec![NONE; cols],
            occurs: vec![Vec::new(); cols],
            scratch: vec![0; cols],
            touched: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn bump(&mut self, col: u32, delta: u8, f: &Zp) {
        let slot = &mut self.scratch[col as usize];
        if *slot == 0 {
            self.touched.push(col);
        }
        *slot = f.add(*slot, delta);
    }

    /// Adds a row given as `(column, value)` pairs (duplicates are summed).
    pub fn insert(&mut self, entries: &[(u32, u8)], f: &Zp) -> bool {
        self.touched.clear();
        for &(c, v) in entries {
            if v != 0 {
                self.bump(c, v, f);
            }
        }
        let original: Vec<u32> = self.touched.clone();
        for c in original {
            let coef = self.scratch[c as usize];
            let piv = self.pivot_of_col[c as usize];
            if coef == 0 || piv == NONE {
                continue;
            }
            let m = f.neg(coef);
            // Pivot rows only reach free columns, so this never creates new
            // nonzeros on other pivot columns.
            let row = std::mem::take(&mut self.rows[piv as usize]);
            for &(col, v) in &row {
                self.bump(col, f.mul(m, v), f);
            }
            self.rows[piv as usize] = row;
        }
        let mut new_row: Vec<(u32, u8)> = Vec::new();
        for &c in &self.touched {
            let v = self.scratch[c as usize];
            if v != 0 {
                new_row.push((c, v));
            }
            self.scratch[c as usize] = 0;
        }
        if new_row.is_empty() {
            return false;
        }
        new_row.sort_unstable_by_key(|e| e.0);
        new_row.dedup_by_key(|e| e.0);
        let (pc, lead) = new_row[0];
        let s = f.inv(lead);
        for e in new_row.iter_mut() {
            e.1 = f.mul(e.1, s);
        }
        // Clear the new pivot column from existing rows.
        let holders = std::mem::take(&mut self.occurs[pc as usize]);
        for ridx in holders {
            let row = &self.rows[ridx as usize];
            let Ok(pos) = row.binary_search_by_key(&pc, |e| e.0) else {
                continue;
            };
            let m = f.neg(row[pos].1);
            let merged = merge_axpy(row, m, &new_row, f);
            for &(c, _) in &merged {
                if row.binary_search_by_key(&c, |e| e.0).is_err() {
                    self.occurs[c as usize].push(ridx);
                }
            }
            self.rows[ridx as usize] = merged;
        }
        let idx = self.rows.len() as u32;
        for &(c, _) in new_row.iter().filter(|e| e.0 != pc) {
            self.occurs[c as usize].push(idx);
        }
        self.pivot_of_col[pc as usize] = idx;
        self.pivot_cols.push(pc);
        self.rows.push(new_row);
        true
    }

    /// Nullspace basis, one vector per free column in increasing order.
    pub fn nullspace(&self, f: &Zp) -> Vec<Vec<u8>> {
        let free: Vec<usize> = (0..self.cols)
            .filter(|&c| self.pivot_of_col[c] == NONE)
            .collect();
        let mut slot = vec![NONE; self.cols];
        for (i, &c) in free.iter().enumerate() {
            slot[c] = i as u32;
        }
        let mut out: Vec<Vec<u8>> = free
            .iter()
            .map(|&c| {
                let mut x = vec![0u8; self.cols];
                x[c] = 1;
                x
            })
            .collect();
        for (ridx, row) in self.rows.iter().enumerate() {
            let pc = self.pivot_cols[ridx] as usize;
            for &(c, v) in row.iter().filter(|e| e.0 as usize != pc) {
                let s = slot[c as usize];
                debug_assert!(s != NONE);
                out[s as usize][pc] = f.neg(v);
            }
        }
        out
    }
}

fn merge_axpy(a: &[(u32, u8)], m: u8, b: &[(u32, u8)], f: &Zp) -> Vec<(u32, u8)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        let (c, v) = if take_a {
            i += 1;
            a[i - 1]
        } else if take_b {
            j += 1;
            (b[j - 1].0, f.mul(m, b[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, f.add(a[i - 1].1, f.mul(m, b[j - 1].1)))
        };
        if v != 0 {
            out.push((c, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_tables() {
        let f = Zp::new(5);
        assert_eq!(f.mul(3, 4), 2);
        assert_eq!(f.inv(2), 3);
        assert_eq!(f.sub(1, 3), 3);
        assert_eq!(f.reduce(-7), 3);
    }

    #[test]
    fn inverse_and_rank() {
        let f = Zp::new(3);
        let m = Mat::from_rows(&[vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 2]], 3);
        // Third row = first + 2*second (mod 3)? 1+0=1, 2+2=1 != 0: full rank.
        let inv = m.inverse(&f).unwrap();
        assert_eq!(m.mul(&inv, &f), Mat::identity(3));
        let singular = Mat::from_rows(&[vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 0]], 3);
        assert_eq!(singular.rank(&f), 1);
        assert!(singular.inverse(&f).is_none());
    }

    fn arb_matrix(r: u8) -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
        (1usize..7, 1usize..9).prop_flat_map(move |(rows, cols)| {
            (
                Just(rows),
                Just(cols),
                proptest::collection::vec(0..r, rows * cols),
            )
        })
    }

    proptest! {
        #[test]
        fn nullspace_is_annihilated_and_complete((rows, cols, data) in arb_matrix(3)) {
            let f = Zp::new(3);
            let m = Mat { rows, cols, data };
            let ns = m.nullspace(&f);
            prop_assert_eq!(ns.len() + m.rank(&f), cols);
            for x in &ns {
                let col = Mat::from_rows(&x.iter().map(|&v| vec![v]).collect::<Vec<_>>(), 1);
                prop_assert!(m.mul(&col, &f).is_zero());
            }
        }

        #[test]
        fn sparse_matches_dense((rows, cols, data) in arb_matrix(5)) {
            let f = Zp::new(5);
            let m = Mat { rows, cols, data };
            let mut sp = SparseRref::new(cols);
            for i in 0..rows {
                let entries: Vec<(u32, u8)> = m.row(i).iter().enumerate()
                    .map(|(c, &v)| (c as u32, v)).collect();
                sp.insert(&entries, &f);
            }
            prop_assert_eq!(sp.rank(), m.rank(&f));
            let dense = m.nullspace(&f);
            let sparse = sp.nullspace(&f);
            prop_assert_eq!(sparse.len(), dense.len());
            for x in &sparse {
                for i in 0..rows {
                    let dot = m.row(i).iter().zip(x).fold(0u8, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
                    prop_assert_eq!(dot, 0);
                }
            }
        }
    }
}
