//! Finite fields `F_{p^k}` with elements encoded as integers.
//!
//! An element `c_0 + c_1 x + ... + c_{k-1} x^{k-1}` of `F_p[x]/(f)` is stored as
//! the integer `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`, so `0` and `1` encode the
//! additive and multiplicative identities and comparing encodings is a plain
//! integer comparison.

use crate::error::{Error, Result};

/// Encoded field element, an integer in `[0, p^k)`.
pub type FieldElem = u32;

/// Default upper bound on `p^k`.
pub const DEFAULT_SIZE_BOUND: u64 = 1 << 20;

const MAX_DEGREE: usize = 31;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, little-endian coefficients `c_0..=c_k`.
    modulus: Vec<u32>,
    primitive: FieldElem,
    /// Distinct prime factors of `q - 1`.
    unit_factors: Vec<u64>,
}

/// Builds `F_{p^k}` with the default size bound.
pub fn field_make(p: u64, k: u32) -> Result<Field> {
    Field::with_bound(p, k, DEFAULT_SIZE_BOUND)
}

impl Field {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        field_make(p, k)
    }

    pub fn with_bound(p: u64, k: u32, bound: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::InvalidArgument(
                "extension degree must be positive".into(),
            ));
        }
        let bound = bound.min(1 << 31);
        let q = (p as u128).checked_pow(k).filter(|&q| q <= bound as u128);
        let q = match q {
            Some(q) if (k as usize) <= MAX_DEGREE => q as u32,
            _ => return Err(Error::SizeExceeded { p, k, bound }),
        };
        let p = p as u32;
        let modulus = smallest_irreducible(p, k as usize);
        let mut field = Field {
            p,
            k,
            q,
            modulus,
            primitive: 0,
            unit_factors: prime_factors(q as u64 - 1),
        };
        field.primitive = (1..q)
            .find(|&a| field.is_primitive(a))
            .expect("multiplicative group of a finite field is cyclic");
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Field order `p^k`.
    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn primitive(&self) -> FieldElem {
        self.primitive
    }

    pub fn zero(&self) -> FieldElem {
        0
    }

    pub fn one(&self) -> FieldElem {
        1
    }

    /// Little-endian base-`p` digits of `a`.
    pub fn coeffs(&self, a: FieldElem) -> Vec<u32> {
        let mut out = vec![0; self.k as usize];
        self.digits(a, &mut out);
        out
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElem {
        coeffs
            .iter()
            .rev()
            .fold(0u32, |acc, &c| acc * self.p + c % self.p)
    }

    fn digits(&self, mut a: FieldElem, out: &mut [u32]) {
        for d in out.iter_mut() {
            *d = a % self.p;
            a /= self.p;
        }
    }

    fn encode(&self, digits: &[u32]) -> FieldElem {
        digits.iter().rev().fold(0u32, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.k == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        if self.p == 2 {
            return a ^ b;
        }
        let k = self.k as usize;
        let (mut da, mut db) = ([0u32; MAX_DEGREE], [0u32; MAX_DEGREE]);
        self.digits(a, &mut da[..k]);
        self.digits(b, &mut db[..k]);
        for i in 0..k {
            da[i] = (da[i] + db[i]) % self.p;
        }
        self.encode(&da[..k])
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.k == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        if self.p == 2 {
            return a;
        }
        let k = self.k as usize;
        let mut d = [0u32; MAX_DEGREE];
        self.digits(a, &mut d[..k]);
        for c in d[..k].iter_mut() {
            *c = (self.p - *c) % self.p;
        }
        self.encode(&d[..k])
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        if self.p == 2 {
            return self.mul_binary(a, b);
        }
        let k = self.k as usize;
        let p = self.p as u64;
        let (mut da, mut db) = ([0u32; MAX_DEGREE], [0u32; MAX_DEGREE]);
        self.digits(a, &mut da[..k]);
        self.digits(b, &mut db[..k]);
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        // Reduce x^d for d >= k using the monic modulus.
        for d in (k..2 * k - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..k {
                let sub = c * self.modulus[i] as u64 % p;
                prod[d - k + i] = (prod[d - k + i] + p - sub) % p;
            }
        }
        let mut out = [0u32; MAX_DEGREE];
        for i in 0..k {
            out[i] = prod[i] as u32;
        }
        self.encode(&out[..k])
    }

    fn mul_binary(&self, a: u32, b: u32) -> u32 {
        let k = self.k;
        let mut prod: u64 = 0;
        for i in 0..k {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u64) << i;
            }
        }
        let modbits: u64 = self
            .modulus
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | ((c as u64) << i));
        for d in (k..2 * k).rev() {
            if (prod >> d) & 1 == 1 {
                prod ^= modbits << (d - k);
            }
        }
        prod as u32
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a == 0 {
            return None;
        }
        if self.k == 1 {
            return Some(self.pow(a, self.p as u64 - 2));
        }
        let p = self.p;
        let a_poly = trim(self.coeffs(a));
        // Extended Euclid: track s with s*a = r (mod modulus).
        let (mut r0, mut r1) = (self.modulus.clone(), a_poly);
        let (mut s0, mut s1) = (vec![], vec![1u32]);
        while !r1.is_empty() {
            let (quot, rem) = poly_divrem(&r0, &r1, p);
            let s2 = poly_sub(&s0, &poly_mul(&quot, &s1, p), p);
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant since the modulus is irreducible.
        debug_assert_eq!(r0.len(), 1);
        let scale = inv_mod(r0[0], p);
        let s = poly_scale(&s0, scale, p);
        let mut digits = vec![0u32; self.k as usize];
        for (i, c) in s.iter().enumerate() {
            digits[i] = *c;
        }
        Some(self.encode(&digits))
    }

    fn is_primitive(&self, a: FieldElem) -> bool {
        let n = self.q as u64 - 1;
        self.unit_factors.iter().all(|&l| self.pow(a, n / l) != 1)
    }

    /// Multiplicative order of `a`.
    pub fn elem_order(&self, a: FieldElem) -> Result<u64> {
        if a == 0 || a >= self.q {
            return Err(Error::ZeroElement);
        }
        let mut e = self.q as u64 - 1;
        for &l in &self.unit_factors {
            while e % l == 0 && self.pow(a, e / l) == 1 {
                e /= l;
            }
        }
        Ok(e)
    }

    /// Smallest-encoded element of exact multiplicative order `m`.
    pub fn element_of_order(&self, m: u64) -> Result<FieldElem> {
        let n = self.q as u64 - 1;
        if m == 0 || n % m != 0 {
            return Err(Error::NoSuchOrder {
                order: m,
                q: self.q as u64,
            });
        }
        let h = self.pow(self.primitive, n / m);
        let mut best = None::<FieldElem>;
        let mut cur = 1;
        for j in 1..=m {
            cur = self.mul(cur, h);
            if gcd(j, m) == 1 {
                best = Some(best.map_or(cur, |b: FieldElem| b.min(cur)));
            }
        }
        Ok(best.expect("m >= 1 has a unit residue"))
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q = p^k`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let (mut k, mut rest) = (0, q);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    Some((p, k))
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let (mut base, mut e) = (a as u64 % p as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

fn poly_scale(a: &[u32], c: u32, p: u32) -> Vec<u32> {
    trim(
        a.iter()
            .map(|&x| (x as u64 * c as u64 % p as u64) as u32)
            .collect(),
    )
}

/// Quotient and remainder of `a / b` over `F_p`; `b` must be nonzero and trimmed.
fn poly_divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let lead_inv = inv_mod(*b.last().unwrap(), p) as u64;
    let mut quot = vec![0u32; rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let c = (*rem.last().unwrap() as u64 * lead_inv % p as u64) as u32;
        quot[shift] = c;
        for (i, &bc) in b.iter().enumerate() {
            let sub = (c as u64 * bc as u64 % p as u64) as u32;
            rem[shift + i] = (rem[shift + i] + p - sub) % p;
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let k = f.len() - 1;
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut rest = idx;
            for _ in 0..d {
                g.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            g.push(1);
            if poly_divrem(f, &g, p).1.is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree `k`, ordered by the
/// tuple `(c_0, ..., c_{k-1})`.
fn smallest_irreducible(p: u32, k: usize) -> Vec<u32> {
    let count = (p as u64).pow(k as u32);
    for idx in 0..count {
        let mut f = vec![0u32; k + 1];
        let mut rest = idx;
        for j in (0..k).rev() {
            f[j] = (rest % p as u64) as u32;
            rest /= p as u64;
        }
        f[k] = 1;
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_moduli() {
        assert_eq!(field_make(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(field_make(3, 2).unwrap().modulus(), &[1, 0, 1]);
        let f5 = field_make(5, 1).unwrap();
        assert_eq!(f5.primitive(), 2);
        assert_eq!(f5.order(), 5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(field_make(4, 1), Err(Error::NotPrime(4)));
        assert!(matches!(field_make(2, 21), Err(Error::SizeExceeded { .. })));
        assert!(Field::with_bound(3, 3, 26).is_err());
        assert!(Field::with_bound(3, 3, 27).is_ok());
    }

    #[test]
    fn orders() {
        let f5 = field_make(5, 1).unwrap();
        assert_eq!(f5.elem_order(2), Ok(4));
        assert_eq!(f5.elem_order(1), Ok(1));
        assert_eq!(f5.elem_order(0), Err(Error::ZeroElement));
        let f19 = field_make(19, 1).unwrap();
        assert_eq!(f19.elem_order(4), Ok(9));
    }

    #[test]
    fn elements_of_given_order() {
        let f5 = field_make(5, 1).unwrap();
        assert_eq!(f5.element_of_order(4), Ok(2));
        assert_eq!(f5.element_of_order(1), Ok(1));
        assert!(matches!(
            f5.element_of_order(3),
            Err(Error::NoSuchOrder { .. })
        ));
        let f19 = field_make(19, 1).unwrap();
        assert_eq!(f19.element_of_order(9), Ok(4));
    }

    #[test]
    fn prime_power_split() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    fn check_axioms(f: &Field) {
        let q = f.order();
        for a in 0..q {
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "inverse of {a} in F_{q}");
            }
            for b in 0..q {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
            }
        }
        // Associativity and distributivity on a stride through the cube.
        let step = (q / 16).max(1);
        for a in (0..q).step_by(step as usize) {
            for b in (0..q).step_by(step as usize) {
                for c in 0..q {
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
        assert_eq!(f.elem_order(f.primitive()), Ok(q as u64 - 1));
    }

    #[test]
    fn small_field_axioms_exhaustive() {
        for (p, k) in [
            (2, 1),
            (2, 2),
            (2, 3),
            (3, 2),
            (5, 1),
            (7, 1),
            (3, 3),
            (5, 2),
            (2, 8),
        ] {
            check_axioms(&field_make(p, k).unwrap());
        }
    }

    #[test]
    fn element_of_order_is_exact() {
        for (p, k) in [(2, 4), (3, 2), (19, 1), (7, 2), (13, 1)] {
            let f = field_make(p, k).unwrap();
            let n = f.order() as u64 - 1;
            for m in (1..=n).filter(|m| n % m == 0) {
                let a = f.element_of_order(m).unwrap();
                assert_eq!(f.pow(a, m), 1);
                for d in (1..m).filter(|d| m % d == 0) {
                    assert_ne!(f.pow(a, d), 1);
                }
                // Brute force: nothing smaller has order m.
                for b in 1..a {
                    assert_ne!(f.elem_order(b).unwrap(), m);
                }
            }
        }
    }

    #[test]
    fn coefficient_roundtrip() {
        let f = field_make(3, 3).unwrap();
        for a in 0..f.order() {
            assert_eq!(f.from_coeffs(&f.coeffs(a)), a);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn larger_field_ring_laws(a in 0u32..3125, b in 0u32..3125, c in 0u32..3125) {
                let f = field_make(5, 5).unwrap();
                prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                if a != 0 {
                    prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
            }

            #[test]
            fn binary_field_inverse(a in 1u32..(1 << 12)) {
                let f = field_make(2, 12).unwrap();
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }
}
