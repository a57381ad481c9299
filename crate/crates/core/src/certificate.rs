//! Verified outcome records.
//!
//! A [`Certificate`] can only be obtained by [`Certificate::issue`], which
//! runs the exact checks for its claim, or by [`Certificate::replay`], which
//! parses JSON and runs the same checks again.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fibered2d::FiberedMap;
use crate::linearcert::{verify_matrix_relation, verify_pingpong, PingPongData, ProjArc};
use crate::num::Mat2;
use crate::pa2d::{verify_pa_free, PaMap, Point};
use crate::pl1d::PlMap;
use crate::projcircle::{verify_h_witnesses, ProjCircleMap};
use crate::structure1d::{verify_zk_words, CommutatorExt};
use crate::words::{Generators, GroupElement, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Subject {
    PlPair { f: PlMap, g: PlMap },
    FiberedPair { f: FiberedMap, g: FiberedMap },
    MatrixPair { a: Mat2, b: Mat2, projective: bool },
    PaPair { f: PaMap, g: PaMap, point: Point },
    ProjectivePair { f: ProjCircleMap, g: ProjCircleMap, arc: ProjArc },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum Claim {
    #[serde(rename = "AbelianCert")]
    Abelian,
    #[serde(rename = "ZkWitnessCert")]
    ZkWitness { words: Vec<Word> },
    #[serde(rename = "RelationCert")]
    Relation { word: Word },
    #[serde(rename = "FreeCert")]
    Free { arcs: PingPongData },
    #[serde(rename = "Inconclusive")]
    Inconclusive { reason: String, abelian_hint: bool },
}

impl Claim {
    pub fn kind(&self) -> &'static str {
        match self {
            Claim::Abelian => "AbelianCert",
            Claim::ZkWitness { .. } => "ZkWitnessCert",
            Claim::Relation { .. } => "RelationCert",
            Claim::Free { .. } => "FreeCert",
            Claim::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Claim::Inconclusive { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("certificate does not parse: {0}")]
    Parse(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    subject: Subject,
    claim: Claim,
    verification_log: Vec<String>,
}

#[derive(Deserialize)]
struct RawCertificate {
    subject: Subject,
    claim: Claim,
}

impl Certificate {
    /// Runs the exact checks for `claim` about `subject`.
    pub fn issue(subject: Subject, claim: Claim) -> Result<Certificate, CertError> {
        let verification_log = check(&subject, &claim).map_err(CertError::Verification)?;
        Ok(Certificate { subject, claim, verification_log })
    }

    /// Parses a serialized certificate and re-verifies it from scratch. The
    /// stored log is ignored and regenerated.
    pub fn replay(json: &str) -> Result<Certificate, CertError> {
        let raw: RawCertificate = serde_json::from_str(json).map_err(|e| CertError::Parse(e.to_string()))?;
        Certificate::issue(raw.subject, raw.claim)
    }

    pub fn verify(&self) -> Result<Vec<String>, CertError> {
        check(&self.subject, &self.claim).map_err(CertError::Verification)
    }

    pub fn subject(&self) -> &Subject {
        &self.subject
    }

    pub fn claim(&self) -> &Claim {
        &self.claim
    }

    pub fn verification_log(&self) -> &[String] {
        &self.verification_log
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

fn check_relation_word(word: &Word) -> Result<(), String> {
    if word.is_empty() {
        return Err("relation word is empty".into());
    }
    if !Word::is_reduced(word.letters()) {
        return Err(format!("relation word {word} is not reduced"));
    }
    Ok(())
}

fn check_relation<G: GroupElement>(gens: &Generators<G>, word: &Word) -> Result<Vec<String>, String> {
    check_relation_word(word)?;
    if gens.evaluate(word).is_identity() {
        Ok(vec![
            format!("{word} is a nonempty reduced word"),
            format!("{word} evaluates structurally to the identity"),
        ])
    } else {
        Err(format!("{word} does not evaluate to the identity"))
    }
}

fn check(subject: &Subject, claim: &Claim) -> Result<Vec<String>, String> {
    match (subject, claim) {
        (_, Claim::Inconclusive { reason, .. }) => Ok(vec![format!("no claim made: {reason}")]),
        (Subject::PlPair { f, g }, Claim::Abelian) => {
            if f.commutator_is_identity(g) {
                Ok(vec!["[f, g] evaluates structurally to the identity".into()])
            } else {
                Err("[f, g] is not the identity".into())
            }
        }
        (Subject::PlPair { f, g }, Claim::ZkWitness { words }) => verify_zk_words(&Generators::new(f, g), words),
        (Subject::PlPair { f, g }, Claim::Relation { word }) => check_relation(&Generators::new(f, g), word),
        (Subject::FiberedPair { f, g }, Claim::Relation { word }) => check_relation(&Generators::new(f, g), word),
        (Subject::FiberedPair { f, g }, Claim::Abelian) => {
            if f.commutator_is_identity(g) {
                Ok(vec!["[f, g] evaluates structurally to the identity".into()])
            } else {
                Err("[f, g] is not the identity".into())
            }
        }
        (Subject::FiberedPair { .. }, Claim::ZkWitness { .. }) => {
            Err("witness certificates are not defined for fibered pairs".into())
        }
        (Subject::PlPair { .. } | Subject::FiberedPair { .. }, Claim::Free { .. }) => {
            Err("this group contains no free subgroup; freeness cannot be certified here".into())
        }
        (Subject::MatrixPair { a, b, projective }, Claim::Relation { word }) => {
            check_relation_word(word)?;
            verify_matrix_relation(a, b, word, *projective)
        }
        (Subject::MatrixPair { a, b, .. }, Claim::Free { arcs }) => {
            let mut log = verify_pingpong(a, b, arcs)?;
            log.push("by the ping-pong lemma A and B freely generate a free group".into());
            Ok(log)
        }
        (Subject::MatrixPair { a, b, .. }, Claim::Abelian) => {
            if a.mul(b) == b.mul(a) {
                Ok(vec!["AB = BA exactly".into()])
            } else {
                Err("AB != BA".into())
            }
        }
        (Subject::MatrixPair { .. }, Claim::ZkWitness { .. }) => {
            Err("witness certificates are not defined for matrix pairs".into())
        }
        (Subject::PaPair { f, g, point }, Claim::Free { arcs }) => verify_pa_free(f, g, point, arcs),
        (Subject::PaPair { f, g, .. }, Claim::Relation { word }) => check_relation(&Generators::new(f, g), word),
        (Subject::PaPair { f, g, .. }, Claim::Abelian) => {
            if f.commutator(g).is_identity() {
                Ok(vec!["[f, g] is the identity on every cell".into()])
            } else {
                Err("[f, g] is not the identity".into())
            }
        }
        (Subject::ProjectivePair { f, g, arc }, Claim::ZkWitness { words }) => verify_h_witnesses(f, g, arc, words),
        (Subject::ProjectivePair { f, g, .. }, Claim::Relation { word }) => check_relation(&Generators::new(f, g), word),
        (Subject::ProjectivePair { f, g, .. }, Claim::Abelian) => {
            if f.commutator(g).is_identity() {
                Ok(vec!["[F, G] evaluates structurally to the identity".into()])
            } else {
                Err("[F, G] is not the identity".into())
            }
        }
        (Subject::ProjectivePair { .. }, Claim::Free { .. }) => {
            Err("pairs fixing an arc generate groups without free subgroups; freeness cannot be certified here".into())
        }
        (Subject::PaPair { .. }, Claim::ZkWitness { .. }) => {
            Err("witness certificates are not defined for piecewise-affine pairs".into())
        }
    }
}
