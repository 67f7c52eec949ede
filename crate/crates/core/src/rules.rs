//! Interpretable artifacts extracted from fitted models.

use std::fmt::Write as _;

use crate::dataset::{Dataset, Ternary};
use crate::error::{check_dim, invalid, Error, Result};
use crate::mbnb::MbnbParams;
use crate::mixture_hbm::{responsibilities, HbmModel, HbmVariant, MixtureParams};

/// `feature = value` holding with the given probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Literal {
    pub feature: String,
    pub value: bool,
    pub probability: f64,
}

/// Probabilistic conjunctive rule: given membership in `target`, each
/// feature is an independent Bernoulli.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjunctiveRule {
    pub target: String,
    pub prior: f64,
    /// Probability that each feature is true, in feature order.
    pub literals: Vec<Literal>,
    /// Only the more probable branch of each feature is shown.
    pub simplified: bool,
}

fn rule_from(target: String, prior: f64, names: &[String], p: &[f64], simplified: bool) -> ConjunctiveRule {
    let literals = names
        .iter()
        .zip(p)
        .map(|(name, &p)| {
            let value = !simplified || p >= 0.5;
            Literal {
                feature: name.clone(),
                value,
                probability: if value { p } else { 1.0 - p },
            }
        })
        .collect();
    ConjunctiveRule {
        target,
        prior,
        literals,
        simplified,
    }
}

pub fn extract_rule(m: &MbnbParams, target: &str, simplified: bool) -> ConjunctiveRule {
    rule_from(target.to_string(), m.pi(), m.feature_names(), m.p1(), simplified)
}

/// Rule for `not target`, from the negative-class parameters.
pub fn extract_complement_rule(m: &MbnbParams, target: &str, simplified: bool) -> ConjunctiveRule {
    rule_from(format!("not {target}"), 1.0 - m.pi(), m.feature_names(), m.p0(), simplified)
}

/// `target ⊑ ⊓F⁺ ⊓ ¬F⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximateAxiom {
    pub target: String,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    /// Features above theta in both classes, dropped from both sets.
    pub uninformative: Vec<String>,
    pub theta: f64,
}

impl ApproximateAxiom {
    pub fn is_trivial(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.5 && theta < 1.0 {
        Ok(())
    } else {
        Err(invalid("theta", format!("{theta} is outside (0.5, 1)")))
    }
}

pub fn extract_axiom(m: &MbnbParams, target: &str, theta: f64) -> Result<ApproximateAxiom> {
    check_theta(theta)?;
    let mut axiom = ApproximateAxiom {
        target: target.to_string(),
        positive: vec![],
        negative: vec![],
        uninformative: vec![],
        theta,
    };
    for ((name, &p1), &p0) in m.feature_names().iter().zip(m.p1()).zip(m.p0()) {
        match (p1 > theta, p0 > theta) {
            (true, true) => axiom.uninformative.push(name.clone()),
            (true, false) => axiom.positive.push(name.clone()),
            (false, true) => axiom.negative.push(name.clone()),
            (false, false) => {}
        }
    }
    Ok(axiom)
}

/// A mixture component seen as a subclass of the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRule {
    /// 1-based component index.
    pub id: usize,
    /// Probability of the component given the class it is linked to.
    pub link: f64,
    pub rule: ConjunctiveRule,
}

/// Disjunctive definition `target ⊑ ⊔ C_k` over mixture components.
#[derive(Debug, Clone, PartialEq)]
pub struct DisjunctiveRuleSet {
    pub target: String,
    pub prior: f64,
    pub theta: f64,
    /// Every component with its link to the target.
    pub components: Vec<ComponentRule>,
    /// Components available to the complement definition.
    complement_pool: Vec<ComponentRule>,
    /// Whether the complement takes pool members with link above theta
    /// (class-conditional) or at most `1 - theta` (pipeline).
    complement_by_own_link: bool,
}

impl DisjunctiveRuleSet {
    /// Components with link above theta.
    pub fn disjuncts(&self) -> Vec<&ComponentRule> {
        self.components.iter().filter(|c| c.link > self.theta).collect()
    }

    /// Components defining `not target`.
    pub fn complement_disjuncts(&self) -> Vec<&ComponentRule> {
        self.complement_pool
            .iter()
            .filter(|c| {
                if self.complement_by_own_link {
                    c.link > self.theta
                } else {
                    c.link <= 1.0 - self.theta
                }
            })
            .collect()
    }
}

fn component_rules(m: &MixtureParams, target: &str, links: &[f64], offset: usize) -> Vec<ComponentRule> {
    m.components()
        .iter()
        .zip(links)
        .enumerate()
        .map(|(k, (p, &link))| ComponentRule {
            id: offset + k + 1,
            link,
            rule: rule_from(
                format!("{target}_{}", offset + k + 1),
                m.mu()[k],
                m.feature_names(),
                p,
                true,
            ),
        })
        .collect()
}

/// Disjunctive definition of `target` from a hierarchical model.
///
/// Pipeline models link component k to the target by its mean
/// responsibility over the positive rows of `ds`; the complement uses the
/// components whose link is at most `1 - theta`. Class-conditional models
/// use the positive mixture's weights as links, and the negative mixture's
/// components with weight above theta for the complement.
pub fn extract_disjunctive(h: &HbmModel, target: &str, theta: f64, ds: &Dataset) -> Result<DisjunctiveRuleSet> {
    if !(0.0..1.0).contains(&theta) {
        return Err(invalid("theta", format!("{theta} is outside [0, 1)")));
    }
    check_dim(h.dim(), ds.n_features())?;
    let positives: Vec<usize> = (0..ds.n_rows()).filter(|&t| ds.label(t) == Ternary::True).collect();
    if positives.is_empty() {
        return Err(Error::Extraction("no positive-labeled rows to link components to the target".into()));
    }
    let (components, complement_pool, by_own) = match (h.variant(), h.class_mixtures()) {
        (HbmVariant::ClassConditional, Some([neg, pos])) => (
            component_rules(pos, target, pos.mu(), 0),
            component_rules(neg, target, neg.mu(), pos.k()),
            true,
        ),
        _ => {
            let m = h.mixture();
            let mut links = vec![0.0; m.k()];
            for &t in &positives {
                for (l, r) in links.iter_mut().zip(responsibilities(m, ds.row(t))?) {
                    *l += r;
                }
            }
            for l in &mut links {
                *l /= positives.len() as f64;
            }
            let all = component_rules(m, target, &links, 0);
            (all.clone(), all, false)
        }
    };
    Ok(DisjunctiveRuleSet {
        target: target.to_string(),
        prior: h.top().pi(),
        theta,
        components,
        complement_pool,
        complement_by_own_link: by_own,
    })
}

fn p4(x: f64) -> String {
    format!("{x:.4}")
}

fn bit(b: bool) -> u8 {
    u8::from(b)
}

pub fn render_rule(r: &ConjunctiveRule) -> String {
    let mut out = format!(
        "IF {} with prior {} THEN each feature is independently Bernoulli distributed\n",
        r.target,
        p4(r.prior)
    );
    for l in &r.literals {
        let _ = write!(out, "  AND {} = {} with probability {}", l.feature, bit(l.value), p4(l.probability));
        if !r.simplified {
            let _ = write!(out, " AND {} = 0 with probability {}", l.feature, p4(1.0 - l.probability));
        }
        out.push('\n');
    }
    out
}

pub fn render_axiom(a: &ApproximateAxiom) -> String {
    let mut out = if a.is_trivial() {
        format!("{} SubClassOf: Thing  # trivial (no feature exceeded theta={})", a.target, a.theta)
    } else {
        let conjuncts: Vec<String> = a
            .positive
            .iter()
            .cloned()
            .chain(a.negative.iter().map(|f| format!("not {f}")))
            .collect();
        format!("{} SubClassOf: {}", a.target, conjuncts.join(" and "))
    };
    if !a.uninformative.is_empty() {
        let _ = write!(out, "\n# uninformative (above theta in both classes): {}", a.uninformative.join(", "));
    }
    out
}

fn render_definition(head: &str, parts: &[&ComponentRule], target: &str) -> String {
    if parts.is_empty() {
        return format!("{head} SubClassOf: Nothing  # no component qualifies\n");
    }
    let names: Vec<String> = parts.iter().map(|c| format!("{target}_{}", c.id)).collect();
    format!("{head} SubClassOf: {}\n", names.join(" or "))
}

pub fn render_disjunctive(s: &DisjunctiveRuleSet) -> String {
    let disjuncts = s.disjuncts();
    let complement = s.complement_disjuncts();
    let mut out = format!("IF {} with prior {} THEN\n", s.target, p4(s.prior));
    for c in &s.components {
        let _ = writeln!(out, "  {}_{} with probability {}", s.target, c.id, p4(c.link));
    }
    out.push('\n');
    out.push_str(&render_definition(&s.target, &disjuncts, &s.target));
    out.push_str(&render_definition(&format!("not {}", s.target), &complement, &s.target));
    let mut shown: Vec<&ComponentRule> = disjuncts.into_iter().chain(complement).collect();
    shown.sort_by_key(|c| c.id);
    shown.dedup_by_key(|c| c.id);
    for c in shown {
        out.push('\n');
        out.push_str(&render_rule(&c.rule));
    }
    out
}

/// Wraps rendered text with the comment header written to rule files.
/// Only the `# generated:` line varies between runs.
pub fn with_header(kind: &str, theta: f64, body: &str) -> String {
    format!(
        "# kind: {kind}\n# theta: {theta}\n# generated: {}\n{body}{}",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        if body.ends_with('\n') { "" } else { "\n" }
    )
}
