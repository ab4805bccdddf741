//! JSON certificate files (`coverwreath-cert/1`).
//!
//! Integers are base 10, field elements use the encoding of [`crate::ff`] and
//! matrices are lists of rows.

use serde::{Deserialize, Serialize};

use crate::embed::{
    build_cover, verify_embedding_sampled, verify_obstruction, EmbeddingCertificate,
    GeneratorImage, ObstructionCertificate, ProblemInstance, Transcript, WreathElem,
};
use crate::error::{Error, Result};
use crate::ff::FieldElem;
use crate::grp::{GroupCtx, GroupElem, ProjPoint};
use crate::permmod::ModVec;

pub const CERT_SCHEMA: &str = "coverwreath-cert/1";

pub type Matrix = Vec<Vec<FieldElem>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    Embedding,
    Obstruction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub p: u32,
    pub k: u32,
    /// Coefficients `c_0, ..., c_k` of the defining polynomial.
    pub modulus: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRecord {
    pub cover: Matrix,
    pub vector: Vec<u8>,
    pub image: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralRecord {
    pub element: Matrix,
    pub vector: Vec<u8>,
    pub image: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub scalar: FieldElem,
    pub s: Matrix,
    pub order_s: u64,
    pub g: Matrix,
    pub order_g: u64,
    pub fixed_point: Vec<FieldElem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema: String,
    pub instance: ProblemInstance,
    pub field: FieldInfo,
    pub kind: CertKind,
    pub generators: Vec<GeneratorRecord>,
    pub central_image: Option<CentralRecord>,
    pub witness: Option<WitnessRecord>,
    pub transcript: Option<Transcript>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Embedding(Box<EmbeddingCertificate>),
    Obstruction(ObstructionCertificate),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: CertKind,
    pub transcript: Option<Transcript>,
}

fn field_info(inst: &ProblemInstance) -> Result<FieldInfo> {
    let f = inst.field()?;
    Ok(FieldInfo {
        p: f.p(),
        k: f.k(),
        modulus: f.modulus().to_vec(),
    })
}

fn rows(g: &GroupElem, n: usize) -> Matrix {
    g.to_rows(n)
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedCertificate(msg.into())
}

/// Reads a matrix as an element of `ctx`, rejecting anything not already canonical.
fn read_elem(ctx: &GroupCtx, m: &Matrix, what: &str) -> Result<GroupElem> {
    let n = ctx.n();
    let q = ctx.field().order();
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(malformed(format!("{what} is not a {n}x{n} matrix")));
    }
    let entries: Vec<FieldElem> = m.concat();
    if entries.iter().any(|&x| x >= q) {
        return Err(malformed(format!("{what} has an entry outside F_{q}")));
    }
    let g = ctx
        .element(entries.clone())
        .map_err(|e| malformed(format!("{what}: {e}")))?;
    if g.entries() != entries.as_slice() {
        return Err(malformed(format!("{what} is not in canonical form")));
    }
    Ok(g)
}

impl CertificateFile {
    pub fn from_embedding(cert: &EmbeddingCertificate) -> Result<Self> {
        let n = cert.instance.n;
        Ok(CertificateFile {
            schema: CERT_SCHEMA.to_string(),
            instance: cert.instance,
            field: field_info(&cert.instance)?,
            kind: CertKind::Embedding,
            generators: cert
                .generators
                .iter()
                .map(|g| GeneratorRecord {
                    cover: rows(&g.cover, n),
                    vector: g.image.vec.0.clone(),
                    image: rows(&g.image.grp, n),
                })
                .collect(),
            central_image: Some(CentralRecord {
                element: rows(&cert.central_element, n),
                vector: cert.central_image.vec.0.clone(),
                image: rows(&cert.central_image.grp, n),
            }),
            witness: None,
            transcript: Some(cert.transcript),
            verified: true,
        })
    }

    pub fn from_obstruction(cert: &ObstructionCertificate) -> Result<Self> {
        let n = cert.instance.n;
        Ok(CertificateFile {
            schema: CERT_SCHEMA.to_string(),
            instance: cert.instance,
            field: field_info(&cert.instance)?,
            kind: CertKind::Obstruction,
            generators: Vec::new(),
            central_image: None,
            witness: Some(WitnessRecord {
                scalar: cert.scalar,
                s: rows(&cert.witness, n),
                order_s: cert.order_s,
                g: rows(&cert.image, n),
                order_g: cert.order_g,
                fixed_point: cert.fixed_point.coords().to_vec(),
            }),
            transcript: None,
            verified: true,
        })
    }

    pub fn from_certificate(cert: &Certificate) -> Result<Self> {
        match cert {
            Certificate::Embedding(c) => Self::from_embedding(c),
            Certificate::Obstruction(c) => Self::from_obstruction(c),
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CertificateFile =
            serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        if file.schema != CERT_SCHEMA {
            return Err(malformed(format!(
                "unknown schema {:?}, expected {CERT_SCHEMA:?}",
                file.schema
            )));
        }
        Ok(file)
    }

    /// Rebuilds the typed certificate, checking shapes and canonical forms.
    pub fn to_certificate(&self) -> Result<Certificate> {
        let inst = ProblemInstance::new(self.instance.n, self.instance.q, self.instance.r)?;
        if self.field != field_info(&inst)? {
            return Err(malformed("field description does not match the instance"));
        }
        let cover = build_cover(&inst)?;
        match self.kind {
            CertKind::Embedding => {
                let central = self
                    .central_image
                    .as_ref()
                    .ok_or_else(|| malformed("embedding certificate without central_image"))?;
                let generators = self
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        Ok(GeneratorImage {
                            cover: read_elem(&cover.ctx_s, &g.cover, &format!("generator {i}"))?,
                            image: WreathElem {
                                vec: ModVec(g.vector.clone()),
                                grp: read_elem(
                                    &cover.ctx_g,
                                    &g.image,
                                    &format!("image of generator {i}"),
                                )?,
                            },
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Certificate::Embedding(Box::new(EmbeddingCertificate {
                    instance: inst,
                    generators,
                    central_element: read_elem(&cover.ctx_s, &central.element, "central element")?,
                    central_image: WreathElem {
                        vec: ModVec(central.vector.clone()),
                        grp: read_elem(&cover.ctx_g, &central.image, "central image")?,
                    },
                    transcript: self.transcript.unwrap_or(Transcript {
                        elements: 0,
                        closure_identities: 0,
                        sampled_pairs: 0,
                    }),
                })))
            }
            CertKind::Obstruction => {
                let w = self
                    .witness
                    .as_ref()
                    .ok_or_else(|| malformed("obstruction certificate without witness"))?;
                let fixed_point: ProjPoint = cover
                    .ctx_g
                    .point(w.fixed_point.clone())
                    .map_err(|e| malformed(format!("fixed point: {e}")))?;
                Ok(Certificate::Obstruction(ObstructionCertificate {
                    instance: inst,
                    scalar: w.scalar,
                    witness: read_elem(&cover.ctx_s, &w.s, "witness s")?,
                    image: read_elem(&cover.ctx_g, &w.g, "image g")?,
                    order_s: w.order_s,
                    order_g: w.order_g,
                    fixed_point,
                }))
            }
        }
    }

    /// Re-runs the closure or order/fixed-point checks from the file alone.
    pub fn verify(&self, budget: usize, pairs: &[(usize, usize)]) -> Result<VerificationReport> {
        match self.to_certificate()? {
            Certificate::Embedding(c) => {
                let transcript = verify_embedding_sampled(&c, budget, pairs)?;
                if let Some(claimed) = self.transcript {
                    if (claimed.elements, claimed.closure_identities)
                        != (transcript.elements, transcript.closure_identities)
                    {
                        return Err(Error::VerificationFailed(format!(
                            "transcript claims {} identities over {} elements, found {} over {}",
                            claimed.closure_identities,
                            claimed.elements,
                            transcript.closure_identities,
                            transcript.elements
                        )));
                    }
                }
                Ok(VerificationReport {
                    kind: CertKind::Embedding,
                    transcript: Some(transcript),
                })
            }
            Certificate::Obstruction(c) => {
                verify_obstruction(&c)?;
                Ok(VerificationReport {
                    kind: CertKind::Obstruction,
                    transcript: None,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{construct_embedding, obstruction_witness, EmbeddingOutcome};

    fn embedding(n: usize, q: u64, r: u64) -> CertificateFile {
        let inst = ProblemInstance::new(n, q, r).unwrap();
        let EmbeddingOutcome::Embedding(c) = construct_embedding(&inst, 10_000).unwrap() else {
            panic!("expected an embedding");
        };
        CertificateFile::from_embedding(&c).unwrap()
    }

    fn obstruction(n: usize, q: u64, r: u64) -> CertificateFile {
        let inst = ProblemInstance::new(n, q, r).unwrap();
        CertificateFile::from_obstruction(&obstruction_witness(&inst).unwrap().unwrap()).unwrap()
    }

    #[test]
    fn embedding_round_trip() {
        let file = embedding(2, 7, 2);
        assert_eq!(file.generators.len(), 2);
        assert!(file.generators.iter().all(|g| g.vector.len() == 8));
        let text = file.to_json();
        let back = CertificateFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_json(), text);
        let rebuilt = CertificateFile::from_certificate(&back.to_certificate().unwrap()).unwrap();
        assert_eq!(rebuilt, file);
        let report = back.verify(10_000, &[(1, 2)]).unwrap();
        assert_eq!(report.transcript.unwrap().closure_identities, 672);
    }

    #[test]
    fn obstruction_round_trip() {
        let file = obstruction(2, 5, 2);
        let w = file.witness.as_ref().unwrap();
        assert_eq!(w.s, vec![vec![2, 0], vec![0, 3]]);
        let text = file.to_json();
        assert!(text.contains("\"schema\": \"coverwreath-cert/1\""));
        assert!(text.contains("\"kind\": \"obstruction\""));
        let back = CertificateFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_json(), text);
        back.verify(0, &[]).unwrap();
        obstruction(4, 9, 2).verify(0, &[]).unwrap();
    }

    #[test]
    fn deterministic_output() {
        assert_eq!(embedding(2, 7, 2).to_json(), embedding(2, 7, 2).to_json());
        assert_eq!(
            obstruction(3, 19, 3).to_json(),
            obstruction(3, 19, 3).to_json()
        );
    }

    #[test]
    fn tampering_is_detected() {
        let mut file = embedding(2, 7, 2);
        file.generators[1].vector[3] ^= 1;
        let err = file.verify(10_000, &[]).unwrap_err();
        assert!(err.to_string().contains("closure identity"), "{err}");

        let mut file = obstruction(2, 5, 2);
        file.witness.as_mut().unwrap().order_s = 8;
        assert!(matches!(
            file.verify(0, &[]),
            Err(Error::VerificationFailed(_))
        ));

        let mut file = obstruction(2, 5, 2);
        file.witness.as_mut().unwrap().s = vec![vec![1, 0], vec![0, 1]];
        assert!(file.verify(0, &[]).is_err());

        let mut file = embedding(2, 7, 2);
        file.generators[0].cover[0][0] = 7;
        assert!(matches!(
            file.verify(10_000, &[]),
            Err(Error::MalformedCertificate(_))
        ));
    }

    #[test]
    fn schema_is_checked() {
        let text = obstruction(2, 5, 2)
            .to_json()
            .replace("coverwreath-cert/1", "other/9");
        assert!(matches!(
            CertificateFile::from_json(&text),
            Err(Error::MalformedCertificate(_))
        ));
        assert!(CertificateFile::from_json("{").is_err());
    }
}
