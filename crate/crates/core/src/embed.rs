//! Decision routes for embedding the nonsplit cover `Z_r.PSL_n(q)` into the
//! wreath product `V ⋊ PSL_n(q)`.

use serde::{Deserialize, Serialize};

use crate::cocycle::{restrict_to_central, z1_from_enumeration};
use crate::error::{Error, Result};
use crate::ff::{field_make, gcd, is_prime, prime_power, Field, FieldElem};
use crate::grp::{Enumeration, GroupCtx, GroupElem, ProjPoint};
use crate::linalg::Zp;
use crate::permmod::{fixed_subspace, module_v, ModVec, PermutationModules};

/// Default budget for the enumeration-based routes.
pub const DEFAULT_ROUTE_BUDGET: usize = 100_000;
/// Opt-in budget for larger groups.
pub const HIGH_ROUTE_BUDGET: usize = 2_000_000;

/// `(n, q, r)` with `q` a prime power and `r` a prime dividing `gcd(n, q - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub n: usize,
    pub q: u64,
    pub r: u64,
}

impl ProblemInstance {
    pub fn new(n: usize, q: u64, r: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance(format!(
                "n = {n} must be at least 2"
            )));
        }
        if prime_power(q).is_none() {
            return Err(Error::InvalidInstance(format!(
                "q = {q} is not a prime power"
            )));
        }
        if !is_prime(r) {
            return Err(Error::InvalidInstance(format!("r = {r} is not prime")));
        }
        let d = gcd(n as u64, q - 1);
        if d % r != 0 {
            return Err(Error::InvalidInstance(format!(
                "r = {r} does not divide gcd(n, q - 1) = {d}"
            )));
        }
        Ok(ProblemInstance { n, q, r })
    }

    /// `gcd(n, q - 1)`.
    pub fn d(&self) -> u64 {
        gcd(self.n as u64, self.q - 1)
    }

    /// `(q - 1) / gcd(n, q - 1)`.
    pub fn index(&self) -> u64 {
        (self.q - 1) / self.d()
    }

    /// False exactly for `PSL_2(2)` and `PSL_2(3)`, which are not simple.
    pub fn simple_regime(&self) -> bool {
        !(self.n == 2 && self.q <= 3)
    }

    pub fn field(&self) -> Result<Field> {
        let (p, k) = prime_power(self.q).ok_or_else(|| {
            Error::InvalidInstance(format!("q = {} is not a prime power", self.q))
        })?;
        field_make(p, k)
    }
}

/// True iff `r` does not divide `(q - 1)/gcd(n, q - 1)`.
pub fn arithmetic_decide(inst: &ProblemInstance) -> bool {
    inst.index() % inst.r != 0
}

/// The cover `S = SL_n(q)/K` with `|K| = d/r`, the quotient `G = PSL_n(q)`,
/// and a generator `z` of the kernel of `S → G`.
#[derive(Debug, Clone)]
pub struct Cover {
    pub instance: ProblemInstance,
    pub ctx_s: GroupCtx,
    pub ctx_g: GroupCtx,
    pub z: GroupElem,
}

impl Cover {
    /// Projection `S → G`.
    pub fn project(&self, s: &GroupElem) -> GroupElem {
        self.ctx_g.project(s)
    }
}

pub fn build_cover(inst: &ProblemInstance) -> Result<Cover> {
    let field = inst.field()?;
    let d = inst.d();
    let lam = field.element_of_order(d)?;
    let ctx_s = GroupCtx::new(field.clone(), inst.n, d / inst.r)?;
    let ctx_g = GroupCtx::new(field, inst.n, d)?;
    let z = ctx_s.diag(&vec![lam; inst.n])?;
    Ok(Cover {
        instance: *inst,
        ctx_s,
        ctx_g,
        z,
    })
}

/// Element `(v, g)` of `V ⋊ G` with `(v, g)(w, h) = (v·h + w, gh)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathElem {
    pub vec: ModVec,
    pub grp: GroupElem,
}

impl WreathElem {
    pub fn identity(ctx_g: &GroupCtx, dim: usize) -> Self {
        WreathElem {
            vec: ModVec::zero(dim),
            grp: ctx_g.identity(),
        }
    }

    pub fn mul(&self, other: &WreathElem, ctx_g: &GroupCtx, points: &[ProjPoint], f: &Zp) -> Self {
        let perm = ctx_g.point_permutation(points, &other.grp);
        let moved = permute(&self.vec, &perm);
        WreathElem {
            vec: moved.add(&other.vec, f),
            grp: ctx_g.mul(&self.grp, &other.grp),
        }
    }
}

/// `v·h` for the permutation `i ↦ perm[i]` of basis vectors.
fn permute(v: &ModVec, perm: &[usize]) -> ModVec {
    let mut out = vec![0u8; v.len()];
    for (i, &j) in perm.iter().enumerate() {
        out[j] = v.0[i];
    }
    ModVec(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorImage {
    /// Generator of the cover, canonical in `S`.
    pub cover: GroupElem,
    pub image: WreathElem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub elements: usize,
    pub closure_identities: usize,
    /// Random pairs `(g, h)` additionally checked for `ψ(g)ψ(h) = ψ(gh)`.
    #[serde(default)]
    pub sampled_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingCertificate {
    pub instance: ProblemInstance,
    pub generators: Vec<GeneratorImage>,
    pub central_element: GroupElem,
    pub central_image: WreathElem,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionCertificate {
    pub instance: ProblemInstance,
    /// The scalar `a` of order `r·d` used to build the witness.
    pub scalar: FieldElem,
    /// `s = diag(a, ..., a, a^{1-n})` in the cover.
    pub witness: GroupElem,
    /// Image of `s` in `PSL_n(q)`.
    pub image: GroupElem,
    pub order_s: u64,
    pub order_g: u64,
    pub fixed_point: ProjPoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingOutcome {
    Embedding(Box<EmbeddingCertificate>),
    /// No cocycle of the cover is nonzero on the central kernel.
    NotFound,
}

/// Solves `Z^1(S, V)` exactly and, if some cocycle is nonzero on the central
/// kernel, returns the induced embedding `s ↦ (v(s), π(s))` after checking
/// every closure identity.
pub fn construct_embedding(inst: &ProblemInstance, budget: usize) -> Result<EmbeddingOutcome> {
    let cover = build_cover(inst)?;
    let en = cover.ctx_s.enumerate(budget)?;
    let v = module_v(&cover.ctx_s, inst.r)?;
    let f = v.field().clone();
    let basis = z1_from_enumeration(&en, &v);
    let mut chosen = None;
    for c in &basis.cocycles {
        let value = restrict_to_central(c, &en, &cover.ctx_s, &v, &cover.z)?;
        if value != 0 {
            chosen = Some(c.scale(f.inv(value), &f));
            break;
        }
    }
    let Some(cocycle) = chosen else {
        return Ok(EmbeddingOutcome::NotFound);
    };
    let generators = cover
        .ctx_s
        .generators()
        .iter()
        .zip(&cocycle.gen_values)
        .map(|(s, val)| GeneratorImage {
            cover: s.clone(),
            image: WreathElem {
                vec: val.clone(),
                grp: cover.project(s),
            },
        })
        .collect();
    let mut cert = EmbeddingCertificate {
        instance: *inst,
        generators,
        central_element: cover.z.clone(),
        central_image: WreathElem {
            vec: ModVec(vec![1; v.dim()]),
            grp: cover.ctx_g.identity(),
        },
        transcript: Transcript {
            elements: 0,
            closure_identities: 0,
            sampled_pairs: 0,
        },
    };
    cert.transcript = check_closure(&cover, &en, &cert)?.transcript;
    Ok(EmbeddingOutcome::Embedding(Box::new(cert)))
}

/// Rebuilds the cover, extends the generator images along its BFS tree and
/// checks `ψ(g)·ψ(s_i) = ψ(g·s_i)` for every element and generator.
pub fn verify_embedding(cert: &EmbeddingCertificate, budget: usize) -> Result<Transcript> {
    verify_embedding_sampled(cert, budget, &[])
}

/// As [`verify_embedding`], then also checks `ψ(g)ψ(h) = ψ(gh)` directly for
/// each pair of element indices (taken modulo the cover order).
pub fn verify_embedding_sampled(
    cert: &EmbeddingCertificate,
    budget: usize,
    pairs: &[(usize, usize)],
) -> Result<Transcript> {
    let inst = ProblemInstance::new(cert.instance.n, cert.instance.q, cert.instance.r)?;
    let cover = build_cover(&inst)?;
    let en = cover.ctx_s.enumerate(budget)?;
    let table = check_closure(&cover, &en, cert)?;
    let points = cover.ctx_g.proj_points();
    let f = Zp::new(inst.r as u8);
    for &(a, b) in pairs {
        let (a, b) = (a % en.len(), b % en.len());
        let ab = en
            .index_of(&cover.ctx_s.mul(en.element(a), en.element(b)))
            .expect("closed under products");
        let lhs = table.psi(a).mul(&table.psi(b), &cover.ctx_g, &points, &f);
        if lhs != table.psi(ab) {
            return Err(fail(format!(
                "pair identity psi(g{a})*psi(g{b}) = psi(g{a}*g{b}) fails"
            )));
        }
    }
    Ok(Transcript {
        sampled_pairs: pairs.len(),
        ..table.transcript
    })
}

struct PsiTable {
    dim: usize,
    vecs: Vec<u8>,
    grps: Vec<GroupElem>,
    transcript: Transcript,
}

impl PsiTable {
    fn psi(&self, i: usize) -> WreathElem {
        WreathElem {
            vec: ModVec(self.vecs[i * self.dim..(i + 1) * self.dim].to_vec()),
            grp: self.grps[i].clone(),
        }
    }
}

fn fail(msg: String) -> Error {
    Error::VerificationFailed(msg)
}

fn check_closure(cover: &Cover, en: &Enumeration, cert: &EmbeddingCertificate) -> Result<PsiTable> {
    let ctx_g = &cover.ctx_g;
    let gens = cover.ctx_s.generators();
    let points = ctx_g.proj_points();
    let dim = points.len();
    let r = cover.instance.r as u8;
    let f = Zp::new(r);
    if cert.generators.len() != gens.len() {
        return Err(fail(format!(
            "expected {} generator images, found {}",
            gens.len(),
            cert.generators.len()
        )));
    }
    for (i, (gi, s)) in cert.generators.iter().zip(gens).enumerate() {
        if gi.cover != *s {
            return Err(fail(format!(
                "generator {i} is not the cover generator {s}"
            )));
        }
        if gi.image.grp != cover.project(s) {
            return Err(fail(format!(
                "image of generator {i} does not project to {}",
                cover.project(s)
            )));
        }
        if gi.image.vec.len() != dim || gi.image.vec.0.iter().any(|&x| x >= r) {
            return Err(fail(format!(
                "image vector of generator {i} is not in F_{r}^{dim}"
            )));
        }
    }
    let perms: Vec<Vec<usize>> = cert
        .generators
        .iter()
        .map(|g| ctx_g.point_permutation(&points, &g.image.grp))
        .collect();

    let mut psi_vec: Vec<u8> = vec![0; dim];
    let mut psi_grp: Vec<GroupElem> = vec![ctx_g.identity()];
    let mut checked = 0usize;
    let mut moved = vec![0u8; dim];
    for g in 0..en.len() {
        for (s, img) in cert.generators.iter().enumerate() {
            let t = en.mul_gen(g, s);
            let src = &psi_vec[g * dim..(g + 1) * dim];
            for (i, &j) in perms[s].iter().enumerate() {
                moved[j] = src[i];
            }
            for (m, &w) in moved.iter_mut().zip(&img.image.vec.0) {
                *m = f.add(*m, w);
            }
            let grp = ctx_g.mul(&psi_grp[g], &img.image.grp);
            if en.parent(t) == Some((g, s)) {
                psi_vec.extend_from_slice(&moved);
                psi_grp.push(grp);
            } else if psi_vec[t * dim..(t + 1) * dim] != moved[..] || psi_grp[t] != grp {
                return Err(fail(format!(
                    "closure identity psi(g{g})*psi(s{s}) = psi(g{g}*s{s}) fails (g{g} = {}, s{s} = {})",
                    en.element(g),
                    gens[s]
                )));
            }
            checked += 1;
        }
    }

    if cert.central_element != cover.z {
        return Err(fail(format!("central element is not {}", cover.z)));
    }
    let table = PsiTable {
        dim,
        vecs: psi_vec,
        grps: psi_grp,
        transcript: Transcript {
            elements: en.len(),
            closure_identities: checked,
            sampled_pairs: 0,
        },
    };
    let zi = en
        .index_of(&cover.z)
        .expect("central element lies in the cover");
    let psi_z = table.psi(zi);
    if psi_z != cert.central_image {
        return Err(fail("recorded central image differs from psi(z)".into()));
    }
    let c = psi_z.vec.0[0];
    if !ctx_g.is_identity(&psi_z.grp) || c == 0 || psi_z.vec.0.iter().any(|&x| x != c) {
        return Err(fail("psi(z) is not a nonzero multiple of (t, 1)".into()));
    }
    Ok(table)
}

/// The diagonal witness `diag(a, ..., a, a^{1-n})` with `a` of order `r·d`,
/// which exists iff `r | (q - 1)/d`. Uses matrix arithmetic only.
pub fn obstruction_witness(inst: &ProblemInstance) -> Result<Option<ObstructionCertificate>> {
    if inst.index() % inst.r != 0 {
        return Ok(None);
    }
    let cover = build_cover(inst)?;
    let field = cover.ctx_s.field();
    let a = field.element_of_order(inst.r * inst.d())?;
    let a_inv = field.inv(a).expect("a is nonzero");
    let last = field.pow(a_inv, inst.n as u64 - 1);
    let mut diagonal = vec![a; inst.n];
    diagonal[inst.n - 1] = last;
    let s = cover.ctx_s.diag(&diagonal)?;
    let g = cover.project(&s);
    let order_s = cover.ctx_s.elem_order(&s);
    let order_g = cover.ctx_g.elem_order(&g);
    let r = inst.r;
    if order_s != r * r {
        return Err(Error::WitnessCheckFailed(format!(
            "|s| = {order_s}, expected {}",
            r * r
        )));
    }
    if order_g != r {
        return Err(Error::WitnessCheckFailed(format!(
            "|g| = {order_g}, expected {r}"
        )));
    }
    let mut e1 = vec![0; inst.n];
    e1[0] = 1;
    let e1 = cover.ctx_g.point(e1)?;
    let fixed_point = if cover.ctx_g.act(&e1, &g) == e1 {
        e1
    } else {
        cover
            .ctx_g
            .fixed_points(&g)
            .into_iter()
            .next()
            .ok_or_else(|| Error::WitnessCheckFailed("image of s fixes no point".into()))?
    };
    Ok(Some(ObstructionCertificate {
        instance: *inst,
        scalar: a,
        witness: s,
        image: g,
        order_s,
        order_g,
        fixed_point,
    }))
}

/// Re-checks the three obstruction conditions from the certificate alone.
pub fn verify_obstruction(cert: &ObstructionCertificate) -> Result<()> {
    let inst = ProblemInstance::new(cert.instance.n, cert.instance.q, cert.instance.r)?;
    let cover = build_cover(&inst)?;
    let s = cover
        .ctx_s
        .element(cert.witness.entries().to_vec())
        .map_err(|e| fail(format!("witness is not an element of the cover: {e}")))?;
    if s != cert.witness {
        return Err(fail("witness is not in canonical form".into()));
    }
    let g = cover.project(&s);
    if g != cert.image {
        return Err(fail(
            "recorded image is not the projection of the witness".into(),
        ));
    }
    let r = inst.r;
    let order_s = cover.ctx_s.elem_order(&s);
    if order_s != cert.order_s || order_s != r * r {
        return Err(fail(format!(
            "order of s is {order_s}; certificate claims {} and r^2 = {}",
            cert.order_s,
            r * r
        )));
    }
    let order_g = cover.ctx_g.elem_order(&g);
    if order_g != cert.order_g || order_g != r {
        return Err(fail(format!(
            "order of g is {order_g}; certificate claims {} and r = {r}",
            cert.order_g
        )));
    }
    let x = cover
        .ctx_g
        .point(cert.fixed_point.coords().to_vec())
        .map_err(|e| fail(format!("fixed point: {e}")))?;
    if cover.ctx_g.act(&x, &g) != x {
        return Err(fail("recorded point is not fixed by g".into()));
    }
    Ok(())
}

/// True iff `|s| = r^2`, its image `g` in `G` has order `r`, and `g` fixes a point.
pub fn is_obstruction_element(cover: &Cover, s: &GroupElem) -> bool {
    let r = cover.instance.r;
    if cover.ctx_s.elem_order(s) != r * r {
        return false;
    }
    let g = cover.project(s);
    cover.ctx_g.elem_order(&g) == r && !cover.ctx_g.fixed_points(&g).is_empty()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Held,
    Violated,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub status: CheckStatus,
}

/// Cohomology dimensions of `G = PSL_n(q)` on the permutation module family.
/// `V/I` is written `v_mod_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub instance: ProblemInstance,
    pub group_order: usize,
    pub h0_v: usize,
    pub h0_v_mod_i: usize,
    pub h0_u: usize,
    pub h0_i: usize,
    pub h1_i: usize,
    pub h1_v: usize,
    pub h1_v_mod_i: usize,
    pub h1_u: usize,
    /// `h1(V/I) - h1(V)`.
    pub ker_phi_dim: i64,
    pub predicted_embedding: bool,
    pub checks: Vec<IdentityCheck>,
}

impl CohomologyReport {
    pub fn violations(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Violated)
    }

    pub fn is_consistent(&self) -> bool {
        self.violations().next().is_none()
    }
}

pub fn cohomology_report(inst: &ProblemInstance, budget: usize) -> Result<CohomologyReport> {
    let field = inst.field()?;
    let g = GroupCtx::psl(field, inst.n)?;
    let en = g.enumerate(budget)?;
    let mods = PermutationModules::build(&g, inst.r)?;
    let h1 = |m| z1_from_enumeration(&en, m).h1_dim;
    let h0 = |m| fixed_subspace(m).len();
    let (h1_i, h1_v, h1_v_mod_i, h1_u) = (
        h1(&mods.trivial),
        h1(&mods.v),
        h1(&mods.v_mod_i),
        h1(&mods.u),
    );
    let (h0_v, h0_v_mod_i, h0_u, h0_i) = (
        h0(&mods.v),
        h0(&mods.v_mod_i),
        h0(&mods.u),
        h0(&mods.trivial),
    );
    let ker_phi_dim = h1_v_mod_i as i64 - h1_v as i64;
    let predicted_embedding = ker_phi_dim >= 1;

    let simple = inst.simple_regime();
    let mut checks = Vec::new();
    let mut check = |name: &str, holds: bool, needs_simple: bool| {
        let status = if needs_simple && !simple {
            CheckStatus::Skipped
        } else if holds {
            CheckStatus::Held
        } else {
            CheckStatus::Violated
        };
        checks.push(IdentityCheck {
            name: name.to_string(),
            status,
        });
    };
    check("h0(G,V) = 1", h0_v == 1, false);
    check("h0(G,I) = 1", h0_i == 1, false);
    check("h1(G,I) = 0", h1_i == 0, true);
    check("h0(G,V/I) = 0", h0_v_mod_i == 0, true);
    check(
        "h1(G,V/I) = h1(G,U) - 1",
        h1_v_mod_i as i64 == h1_u as i64 - 1,
        true,
    );
    check("ker_phi_dim in {0,1}", (0..=1).contains(&ker_phi_dim), true);
    check(
        "h1(G,V) = [r | (q-1)/d]",
        h1_v == usize::from(inst.index() % inst.r == 0),
        true,
    );
    if inst.n >= 3 {
        check("h1(G,U) = 2", h1_u == 2, true);
    }
    check(
        "(ker_phi_dim = 1) = arithmetic criterion",
        (ker_phi_dim == 1) == arithmetic_decide(inst),
        true,
    );
    Ok(CohomologyReport {
        instance: *inst,
        group_order: en.len(),
        h0_v,
        h0_v_mod_i,
        h0_u,
        h0_i,
        h1_i,
        h1_v,
        h1_v_mod_i,
        h1_u,
        ker_phi_dim,
        predicted_embedding,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RouteOutcome {
    Embeds,
    DoesNotEmbed,
    Skipped { reason: String },
}

impl RouteOutcome {
    pub fn ran(&self) -> bool {
        !matches!(self, RouteOutcome::Skipped { .. })
    }
}

/// Results of all routes for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub instance: ProblemInstance,
    pub simple_regime: bool,
    pub arithmetic_embeds: bool,
    pub construct: RouteOutcome,
    pub cohomology: RouteOutcome,
    pub witness_produced: bool,
    pub consistent: bool,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    /// Routes that actually ran, besides the arithmetic criterion.
    pub fn routes_run(&self) -> Vec<&'static str> {
        let mut out = vec!["arithmetic", "witness"];
        if self.construct.ran() {
            out.push("construct");
        }
        if self.cohomology.ran() {
            out.push("cohomology");
        }
        out
    }
}

fn skip_reason(e: &Error) -> Option<String> {
    matches!(e, Error::BudgetExceeded { .. }).then(|| e.to_string())
}

/// Which enumeration-based routes to run. The arithmetic and witness routes
/// are cheap and always run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Routes {
    pub construct: bool,
    pub cohomology: bool,
}

impl Default for Routes {
    fn default() -> Self {
        Routes {
            construct: true,
            cohomology: true,
        }
    }
}

/// Runs every route within budget and checks that they agree.
pub fn cross_validate(inst: &ProblemInstance, budget: usize) -> Verdict {
    cross_validate_routes(inst, budget, Routes::default())
}

fn not_selected() -> RouteOutcome {
    RouteOutcome::Skipped {
        reason: "not selected".into(),
    }
}

pub fn cross_validate_routes(inst: &ProblemInstance, budget: usize, routes: Routes) -> Verdict {
    let arithmetic = arithmetic_decide(inst);
    let mut diagnostics = Vec::new();
    let mut consistent = true;

    let construct = if !routes.construct {
        not_selected()
    } else {
        match construct_embedding(inst, budget) {
            Ok(EmbeddingOutcome::Embedding(_)) => RouteOutcome::Embeds,
            Ok(EmbeddingOutcome::NotFound) => RouteOutcome::DoesNotEmbed,
            Err(e) => match skip_reason(&e) {
                Some(reason) => RouteOutcome::Skipped { reason },
                None => {
                    consistent = false;
                    diagnostics.push(format!("construct route failed: {e}"));
                    RouteOutcome::Skipped {
                        reason: e.to_string(),
                    }
                }
            },
        }
    };

    let cohomology = if !routes.cohomology {
        not_selected()
    } else if !inst.simple_regime() {
        RouteOutcome::Skipped {
            reason: "PSL_n(q) is not simple".into(),
        }
    } else {
        match cohomology_report(inst, budget) {
            Ok(report) => {
                for v in report.violations() {
                    consistent = false;
                    diagnostics.push(format!("cohomology identity violated: {}", v.name));
                }
                if report.predicted_embedding {
                    RouteOutcome::Embeds
                } else {
                    RouteOutcome::DoesNotEmbed
                }
            }
            Err(e) => match skip_reason(&e) {
                Some(reason) => RouteOutcome::Skipped { reason },
                None => {
                    consistent = false;
                    diagnostics.push(format!("cohomology route failed: {e}"));
                    RouteOutcome::Skipped {
                        reason: e.to_string(),
                    }
                }
            },
        }
    };

    let witness_produced = match obstruction_witness(inst) {
        Ok(w) => w.is_some(),
        Err(e) => {
            consistent = false;
            diagnostics.push(format!("witness route failed: {e}"));
            false
        }
    };

    let expected = if arithmetic {
        RouteOutcome::Embeds
    } else {
        RouteOutcome::DoesNotEmbed
    };
    for (name, outcome) in [("construct", &construct), ("cohomology", &cohomology)] {
        if outcome.ran() && *outcome != expected {
            consistent = false;
            diagnostics.push(format!(
                "{name} route gives {outcome:?} but the arithmetic criterion gives {expected:?}"
            ));
        }
    }
    if witness_produced == arithmetic {
        consistent = false;
        diagnostics.push(format!(
            "witness produced = {witness_produced} but the arithmetic criterion says embeds = {arithmetic}"
        ));
    }
    Verdict {
        instance: *inst,
        simple_regime: inst.simple_regime(),
        arithmetic_embeds: arithmetic,
        construct,
        cohomology,
        witness_produced,
        consistent,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(n: usize, q: u64, r: u64) -> ProblemInstance {
        ProblemInstance::new(n, q, r).unwrap()
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(
            ProblemInstance::new(2, 7, 3),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            ProblemInstance::new(2, 12, 2),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            ProblemInstance::new(4, 9, 4),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            ProblemInstance::new(1, 5, 2),
            Err(Error::InvalidInstance(_))
        ));
        assert!(!inst(2, 3, 2).simple_regime());
        assert!(inst(2, 5, 2).simple_regime());
    }

    #[test]
    fn arithmetic_examples() {
        assert!(arithmetic_decide(&inst(2, 7, 2)));
        assert!(!arithmetic_decide(&inst(2, 5, 2)));
        assert!(arithmetic_decide(&inst(3, 4, 3)));
        assert!(!arithmetic_decide(&inst(4, 9, 2)));
        assert!(!arithmetic_decide(&inst(3, 19, 3)));
    }

    #[test]
    fn cover_construction() {
        let c = build_cover(&inst(2, 5, 2)).unwrap();
        assert_eq!(c.ctx_s.kernel_order(), 1);
        assert_eq!(c.z, c.ctx_s.diag(&[4, 4]).unwrap());
        let c = build_cover(&inst(3, 4, 3)).unwrap();
        assert_eq!(c.ctx_s.kernel_order(), 1);
        let w = c.ctx_s.scalar_value(&c.z).unwrap();
        assert_eq!(c.ctx_s.field().elem_order(w), Ok(3));
        for (n, q, r) in [(2, 5, 2), (2, 9, 2), (3, 4, 3), (4, 9, 2), (3, 7, 3)] {
            let c = build_cover(&inst(n, q, r)).unwrap();
            assert_eq!(c.ctx_s.order(), r as u128 * c.ctx_g.order());
            assert_eq!(c.ctx_s.elem_order(&c.z), r);
            assert!(c.ctx_g.is_identity(&c.project(&c.z)));
        }
    }

    #[test]
    fn wreath_product_is_a_monoid() {
        let g = GroupCtx::psl(field_make(5, 1).unwrap(), 2).unwrap();
        let points = g.proj_points();
        let f = Zp::new(2);
        let en = g.enumerate(100).unwrap();
        let elems: Vec<WreathElem> = (0..9)
            .map(|i| WreathElem {
                vec: ModVec((0..6).map(|j| ((i * 7 + j * 3) % 5 % 2) as u8).collect()),
                grp: en.element((i * 13) % en.len()).clone(),
            })
            .collect();
        let id = WreathElem::identity(&g, 6);
        for a in &elems {
            assert_eq!(&a.mul(&id, &g, &points, &f), a);
            assert_eq!(&id.mul(a, &g, &points, &f), a);
            for b in &elems {
                for c in &elems[..3] {
                    let left = a.mul(b, &g, &points, &f).mul(c, &g, &points, &f);
                    let right = a.mul(&b.mul(c, &g, &points, &f), &g, &points, &f);
                    assert_eq!(left, right);
                }
            }
        }
    }

    /// Valid `(n, q, r)` with `q` a prime power below 300 and `n <= 6`.
    fn any_instance() -> impl Strategy<Value = ProblemInstance> {
        let qs: Vec<u64> = (2..300).filter(|&q| prime_power(q).is_some()).collect();
        (2usize..=6, proptest::sample::select(qs)).prop_filter_map(
            "needs a prime r | gcd(n, q-1)",
            |(n, q)| {
                let d = gcd(n as u64, q - 1);
                let r = (2..=d).find(|&r| d % r == 0 && is_prime(r))?;
                ProblemInstance::new(n, q, r).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn witness_exists_iff_r_divides_index(inst in any_instance()) {
            let w = obstruction_witness(&inst).unwrap();
            prop_assert_eq!(w.is_some(), !arithmetic_decide(&inst));
            if let Some(w) = w {
                prop_assert!(verify_obstruction(&w).is_ok());
            }
        }

        #[test]
        fn wreath_product_associative(
            seeds in proptest::collection::vec((0usize..60, proptest::collection::vec(0u8..2, 6)), 3)
        ) {
            let g = GroupCtx::psl(field_make(5, 1).unwrap(), 2).unwrap();
            let en = g.enumerate(100).unwrap();
            let points = g.proj_points();
            let f = Zp::new(2);
            let e: Vec<WreathElem> = seeds
                .into_iter()
                .map(|(i, v)| WreathElem { vec: ModVec(v), grp: en.element(i).clone() })
                .collect();
            let left = e[0].mul(&e[1], &g, &points, &f).mul(&e[2], &g, &points, &f);
            let right = e[0].mul(&e[1].mul(&e[2], &g, &points, &f), &g, &points, &f);
            prop_assert_eq!(left, right);
        }
    }

    #[test]
    fn small_embeddings() {
        let EmbeddingOutcome::Embedding(cert) = construct_embedding(&inst(2, 7, 2), 1000).unwrap()
        else {
            panic!("(2,7,2) embeds");
        };
        assert_eq!(
            cert.transcript,
            Transcript {
                elements: 336,
                closure_identities: 672,
                sampled_pairs: 0
            }
        );
        assert_eq!(verify_embedding(&cert, 1000).unwrap(), cert.transcript);
        let pairs: Vec<(usize, usize)> = (0..50).map(|i| (i * 37 + 5, i * 101 + 3)).collect();
        assert_eq!(
            verify_embedding_sampled(&cert, 1000, &pairs)
                .unwrap()
                .sampled_pairs,
            50
        );
        assert_eq!(
            construct_embedding(&inst(2, 5, 2), 1000).unwrap(),
            EmbeddingOutcome::NotFound
        );
    }

    #[test]
    fn tampered_embedding_is_rejected() {
        let EmbeddingOutcome::Embedding(cert) = construct_embedding(&inst(2, 7, 2), 1000).unwrap()
        else {
            panic!("(2,7,2) embeds");
        };
        let mut bad = (*cert).clone();
        bad.generators[0].image.vec.0[0] ^= 1;
        let err = verify_embedding(&bad, 1000).unwrap_err();
        assert!(err.to_string().contains("closure identity"), "{err}");
        let mut bad = (*cert).clone();
        bad.central_image.vec.0[0] = 0;
        assert!(verify_embedding(&bad, 1000).is_err());
    }

    #[test]
    fn witness_examples() {
        let w = obstruction_witness(&inst(2, 5, 2)).unwrap().unwrap();
        assert_eq!(w.scalar, 2);
        assert_eq!(w.witness.entries(), &[2, 0, 0, 3]);
        assert_eq!((w.order_s, w.order_g), (4, 2));
        assert_eq!(w.fixed_point.coords(), &[1, 0]);
        verify_obstruction(&w).unwrap();

        let w = obstruction_witness(&inst(3, 19, 3)).unwrap().unwrap();
        assert_eq!(w.scalar, 4);
        // 4^{-2} = 16^{-1} = 6 mod 19.
        assert_eq!(w.witness.entries(), &[4, 0, 0, 0, 4, 0, 0, 0, 6]);
        assert_eq!((w.order_s, w.order_g), (9, 3));

        assert_eq!(obstruction_witness(&inst(2, 7, 2)).unwrap(), None);
    }

    #[test]
    fn tampered_obstruction_is_rejected() {
        let mut w = obstruction_witness(&inst(2, 5, 2)).unwrap().unwrap();
        w.order_s = 2;
        assert!(verify_obstruction(&w).is_err());
    }

    #[test]
    fn obstruction_element_examples() {
        let c = build_cover(&inst(2, 5, 2)).unwrap();
        assert!(is_obstruction_element(&c, &c.ctx_s.diag(&[2, 3]).unwrap()));
        assert!(!is_obstruction_element(&c, &c.ctx_s.identity()));
        // In SL_2(7) every element of order 4 has a fixed-point-free image.
        let c = build_cover(&inst(2, 7, 2)).unwrap();
        let en = c.ctx_s.enumerate(1000).unwrap();
        let order4: Vec<&GroupElem> = en
            .elements()
            .iter()
            .filter(|s| c.ctx_s.elem_order(s) == 4)
            .collect();
        assert!(!order4.is_empty());
        assert!(order4.iter().all(|s| !is_obstruction_element(&c, s)));
        let rot = c.ctx_s.element(vec![0, 1, 6, 0]).unwrap();
        assert_eq!(c.ctx_s.elem_order(&rot), 4);
        assert!(c.ctx_g.fixed_points(&c.project(&rot)).is_empty());
    }

    #[test]
    fn small_cohomology_reports() {
        let rep = cohomology_report(&inst(2, 5, 2), 1000).unwrap();
        assert_eq!((rep.h1_v, rep.h1_v_mod_i, rep.ker_phi_dim), (1, 1, 0));
        assert!(!rep.predicted_embedding);
        assert!(rep.is_consistent(), "{:?}", rep.checks);
        let rep = cohomology_report(&inst(2, 7, 2), 1000).unwrap();
        assert_eq!((rep.h1_v, rep.ker_phi_dim), (0, 1));
        assert!(rep.predicted_embedding);
        assert!(rep.is_consistent(), "{:?}", rep.checks);
    }

    #[test]
    fn cross_validation_small() {
        for (q, embeds) in [(5, false), (7, true), (9, false), (11, true), (13, false)] {
            let v = cross_validate(&inst(2, q, 2), DEFAULT_ROUTE_BUDGET);
            assert!(v.consistent, "{v:?}");
            assert_eq!(v.arithmetic_embeds, embeds);
            assert_eq!(q % 4 == 3, embeds);
            assert_eq!(v.routes_run().len(), 4);
        }
        let v = cross_validate(&inst(2, 3, 2), DEFAULT_ROUTE_BUDGET);
        assert!(v.consistent, "{v:?}");
        assert!(!v.simple_regime);
        assert_eq!(v.construct, RouteOutcome::Embeds);
        let v = cross_validate(&inst(3, 19, 3), DEFAULT_ROUTE_BUDGET);
        assert!(v.consistent);
        assert_eq!(v.routes_run(), vec!["arithmetic", "witness"]);
    }
}
