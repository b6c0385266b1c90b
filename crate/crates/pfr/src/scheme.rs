//! A common front for the two retrieval schemes.

use std::fmt;
use std::sync::Arc;

use crate::binary::{binary_field, decode_binary, plan_binary, BinaryPlan};
use crate::database::DecodedStream;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::general::{decode_general, plan_general, setup_general, GeneralPlan, GeneralSetup};
use crate::projspace::{CoeffVector, ThetaIndex, VectorSpace};
use crate::query::{Answer, PlanRng, Query};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Binary,
    General,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Binary => "binary",
            SchemeKind::General => "general",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeParams {
    /// Two servers, GF(2) coefficients.
    Binary { files: usize },
    /// N servers over GF(q), q >= N.
    General { servers: usize, files: usize, field: FieldSpec },
}

impl SchemeParams {
    pub fn binary(files: usize) -> Result<Self> {
        VectorSpace::new(2, files)?;
        Ok(SchemeParams::Binary { files })
    }

    pub fn general(servers: usize, files: usize, p: u32, m: u32) -> Result<Self> {
        let field = FieldSpec::new(p, m)?;
        if servers < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 servers, got {servers}")));
        }
        if (field.order() as usize) < servers {
            return Err(Error::InvalidParameter(format!(
                "field order {} is smaller than the number of servers {servers}",
                field.order()
            )));
        }
        VectorSpace::new(field.order(), files)?;
        Ok(SchemeParams::General { servers, files, field })
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeParams::Binary { .. } => SchemeKind::Binary,
            SchemeParams::General { .. } => SchemeKind::General,
        }
    }

    pub fn servers(&self) -> usize {
        match self {
            SchemeParams::Binary { .. } => 2,
            SchemeParams::General { servers, .. } => *servers,
        }
    }

    pub fn files(&self) -> usize {
        match self {
            SchemeParams::Binary { files } | SchemeParams::General { files, .. } => *files,
        }
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            SchemeParams::Binary { .. } => binary_field(),
            SchemeParams::General { field, .. } => field.clone(),
        }
    }

    pub fn space(&self) -> VectorSpace {
        VectorSpace::new(self.field().order(), self.files()).expect("validated at construction")
    }

    /// Number of possible functions, (q^K-1)/(q-1).
    pub fn theta_count(&self) -> usize {
        self.space().canonical_count() as usize
    }

    /// L, the number of layers one retrieval covers.
    pub fn layers(&self) -> u128 {
        if let SchemeParams::Binary { files } = self {
            return 1 << (files + 1);
        }
        let (n, q, k) = self.nqk();
        let nz = q.pow(k) - 1;
        (n - 1) * nz.pow(n as u32 - 1) + (q - 1).pow(n as u32 - 1)
    }

    /// Q, the number of answer records downloaded per retrieval.
    pub fn downloads(&self) -> u128 {
        if let SchemeParams::Binary { files } = self {
            return 4 * ((1 << files) - 1);
        }
        let (n, q, k) = self.nqk();
        n * (q.pow(k) - 1).pow(n as u32 - 1)
    }

    fn nqk(&self) -> (u128, u128, u32) {
        (self.servers() as u128, self.field().order() as u128, self.files() as u32)
    }

    pub fn setup(&self, rng: &mut PlanRng) -> Result<Option<Arc<GeneralSetup>>> {
        match self {
            SchemeParams::Binary { .. } => Ok(None),
            SchemeParams::General { servers, files, field } => {
                Ok(Some(Arc::new(setup_general(*servers, *files, field, rng)?)))
            }
        }
    }

    /// Draws a fresh setup (for the general scheme) and plans one retrieval.
    pub fn plan(&self, theta: ThetaIndex, rng: &mut PlanRng) -> Result<(Vec<Query>, Plan)> {
        match self.setup(rng)? {
            None => {
                let (queries, plan) = plan_binary(self.files(), theta, rng)?;
                Ok((queries.into(), Plan::Binary(plan)))
            }
            Some(setup) => {
                let (queries, plan) = plan_general(&setup, theta, rng)?;
                Ok((queries, Plan::General(plan)))
            }
        }
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeParams::Binary { files } => write!(f, "binary(N=2, q=2, K={files})"),
            SchemeParams::General { servers, files, field } => {
                write!(f, "general(N={servers}, q={}, K={files})", field.order())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Plan {
    Binary(BinaryPlan),
    General(GeneralPlan),
}

impl Plan {
    pub fn layers(&self) -> usize {
        match self {
            Plan::Binary(p) => p.layers,
            Plan::General(p) => p.layers,
        }
    }

    pub fn theta(&self) -> ThetaIndex {
        match self {
            Plan::Binary(p) => p.theta,
            Plan::General(p) => p.theta,
        }
    }

    pub fn theta_vector(&self) -> CoeffVector {
        match self {
            Plan::Binary(p) => VectorSpace::new(2, p.files).expect("planned").nonzero_vector(p.theta.0 as u64 - 1),
            Plan::General(p) => p.theta_vector.clone(),
        }
    }

    pub fn decode(&self, answers: &[Answer]) -> Result<DecodedStream> {
        match self {
            Plan::Binary(p) => match answers {
                [a1, a2] => decode_binary(p, a1, a2),
                _ => Err(Error::MisalignedAnswer(format!("{} answers for 2 servers", answers.len()))),
            },
            Plan::General(p) => decode_general(p, answers),
        }
    }
}
