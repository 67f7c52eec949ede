//! JSON model documents.
//!
//! ```json
//! {"kind": "mbnb", "version": 1, "pi": 0.4, "p1": [...], "p0": [...],
//!  "feature_names": [...], "alpha": 1.0}
//! ```
//!
//! Floats are written in shortest round-trip form, so a saved model
//! reloads bit-identical.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mbnb::MbnbParams;
use crate::mixture_hbm::{HbmModel, HbmVariant, MixtureParams};

pub const FORMAT_VERSION: u32 = 1;

/// Any model the command line can save and load.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Mbnb(MbnbParams),
    Mixture(MixtureParams),
    Hbm(HbmModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Mbnb(_) => "mbnb",
            Model::Mixture(_) => "mixture",
            Model::Hbm(_) => "hbm",
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::Mbnb(m) => m.feature_names(),
            Model::Mixture(m) => m.feature_names(),
            Model::Hbm(h) => h.top().feature_names(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MbnbDoc {
    pi: f64,
    p1: Vec<f64>,
    p0: Vec<f64>,
    feature_names: Vec<String>,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureDoc {
    #[serde(rename = "K")]
    k: usize,
    mu: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    feature_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassMixturesDoc {
    negative: MixtureDoc,
    positive: MixtureDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
enum Body {
    Mbnb(MbnbDoc),
    Mixture(MixtureDoc),
    Hbm {
        variant: String,
        mixture: MixtureDoc,
        top: MbnbDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        class_mixtures: Option<ClassMixturesDoc>,
    },
}

#[derive(Serialize, Deserialize)]
struct Document {
    version: u32,
    #[serde(flatten)]
    body: Body,
}

fn mbnb_doc(m: &MbnbParams) -> MbnbDoc {
    MbnbDoc {
        pi: m.pi(),
        p1: m.p1().to_vec(),
        p0: m.p0().to_vec(),
        feature_names: m.feature_names().to_vec(),
        alpha: m.alpha(),
    }
}

fn mixture_doc(m: &MixtureParams) -> MixtureDoc {
    MixtureDoc {
        k: m.k(),
        mu: m.mu().to_vec(),
        p: m.components().to_vec(),
        feature_names: m.feature_names().to_vec(),
    }
}

fn mbnb_from(d: MbnbDoc) -> Result<MbnbParams> {
    MbnbParams::new(d.pi, d.p1, d.p0, d.feature_names, d.alpha)
}

fn mixture_from(d: MixtureDoc) -> Result<MixtureParams> {
    if d.k != d.mu.len() {
        return Err(Error::Model(format!("K = {} but mu has {} entries", d.k, d.mu.len())));
    }
    MixtureParams::new(d.mu, d.p, d.feature_names)
}

pub fn to_json(model: &Model) -> String {
    let body = match model {
        Model::Mbnb(m) => Body::Mbnb(mbnb_doc(m)),
        Model::Mixture(m) => Body::Mixture(mixture_doc(m)),
        Model::Hbm(h) => Body::Hbm {
            variant: h.variant().as_str().to_string(),
            mixture: mixture_doc(h.mixture()),
            top: mbnb_doc(h.top()),
            class_mixtures: h.class_mixtures().map(|[neg, pos]| ClassMixturesDoc {
                negative: mixture_doc(neg),
                positive: mixture_doc(pos),
            }),
        },
    };
    let doc = Document {
        version: FORMAT_VERSION,
        body,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model documents always serialize");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<Model> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
    if doc.version != FORMAT_VERSION {
        return Err(Error::Model(format!(
            "unsupported version {} (this build reads version {FORMAT_VERSION})",
            doc.version
        )));
    }
    let wrap = |e: Error| match e {
        Error::Model(_) => e,
        other => Error::Model(other.to_string()),
    };
    Ok(match doc.body {
        Body::Mbnb(d) => Model::Mbnb(mbnb_from(d).map_err(wrap)?),
        Body::Mixture(d) => Model::Mixture(mixture_from(d).map_err(wrap)?),
        Body::Hbm {
            variant,
            mixture,
            top,
            class_mixtures,
        } => {
            let variant: HbmVariant = variant.parse().map_err(wrap)?;
            let class_mixtures = match class_mixtures {
                Some(c) => Some([
                    mixture_from(c.negative).map_err(wrap)?,
                    mixture_from(c.positive).map_err(wrap)?,
                ]),
                None => None,
            };
            Model::Hbm(
                HbmModel::new(
                    mixture_from(mixture).map_err(wrap)?,
                    mbnb_from(top).map_err(wrap)?,
                    variant,
                    class_mixtures,
                )
                .map_err(wrap)?,
            )
        }
    })
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, to_json(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Model> {
    from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mbnb() -> MbnbParams {
        MbnbParams::new(
            0.1 + 0.2,
            vec![1.0 / 3.0, 0.9],
            vec![0.123_456_789_012_345_68, 1e-9],
            vec!["A".into(), "(r some Thing)".into()],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn mbnb_round_trip_is_exact() {
        let m = Model::Mbnb(mbnb());
        let text = to_json(&m);
        assert!(text.contains("\"kind\": \"mbnb\""));
        assert!(text.contains("\"version\": 1"));
        assert_eq!(from_json(&text).unwrap(), m);
    }

    #[test]
    fn hbm_round_trip() {
        let neg = MixtureParams::unnamed(vec![0.25, 0.75], vec![vec![0.2, 0.3], vec![0.6, 0.7]]).unwrap();
        let pos = MixtureParams::unnamed(vec![0.5, 0.5], vec![vec![0.9, 0.1], vec![0.8, 0.4]]).unwrap();
        let top = MbnbParams::unnamed(0.4, vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let pooled = MixtureParams::unnamed(
            vec![0.2, 0.2, 0.15, 0.45],
            vec![vec![0.9, 0.1], vec![0.8, 0.4], vec![0.2, 0.3], vec![0.6, 0.7]],
        )
        .unwrap();
        let h = HbmModel::new(pooled, top, HbmVariant::ClassConditional, Some([neg, pos])).unwrap();
        let m = Model::Hbm(h);
        assert_eq!(from_json(&to_json(&m)).unwrap(), m);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(from_json("{"), Err(Error::Model(_))));
        let text = to_json(&Model::Mbnb(mbnb())).replace("\"version\": 1", "\"version\": 7");
        assert!(from_json(&text).unwrap_err().to_string().contains("version 7"));
        let text = to_json(&Model::Mbnb(mbnb())).replace("\"mbnb\"", "\"svm\"");
        assert!(from_json(&text).is_err());
        let bad = r#"{"version":1,"kind":"mixture","K":3,"mu":[1.0],"P":[[0.5]],"feature_names":["a"]}"#;
        assert!(from_json(bad).unwrap_err().to_string().contains("K = 3"));
    }
}
