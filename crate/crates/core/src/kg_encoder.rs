//! Knowledge-base parsing and open-world ternary encoding of individuals.
//!
//! The assertion format is line oriented, one directive per line, with `#`
//! starting a comment:
//!
//! ```text
//! class <C>            subclass <C> <D>     disjoint <C> <D>
//! role <r>             closed <r>           individual <a>
//! instance <a> <C>     neg-instance <a> <C> rel <r> <a> <b>
//! ```
//!
//! Classes and roles must be declared (forward references are fine);
//! individuals are declared implicitly by the assertions that mention them.
//!
//! Membership is derived with a small sound rule set: asserted memberships
//! propagate up the subclass closure; a derived membership in `B` refutes
//! every class declared disjoint with `B`; refutations (derived or asserted
//! with `neg-instance`) propagate down to subclasses. `∃r.⊤` holds when the
//! individual is the subject of some `r` assertion and is refuted only for
//! roles declared `closed`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::dataset::{Dataset, Ternary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceAssertion {
    pub individual: usize,
    pub class: usize,
    pub positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoleAssertion {
    pub role: usize,
    pub subject: usize,
    pub object: usize,
}

/// A parsed, fully resolved knowledge base.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    classes: Vec<String>,
    class_index: HashMap<String, usize>,
    roles: Vec<String>,
    role_index: HashMap<String, usize>,
    closed: Vec<bool>,
    individuals: Vec<String>,
    individual_index: HashMap<String, usize>,
    subclass_axioms: Vec<(usize, usize)>,
    disjointness: Vec<(usize, usize)>,
    instance_assertions: Vec<InstanceAssertion>,
    role_assertions: Vec<RoleAssertion>,
    /// Direct superclasses per class (strict, deduplicated).
    parents: Vec<Vec<usize>>,
    /// Reflexive-transitive superclasses per class.
    ancestors: Vec<Vec<usize>>,
    /// Reflexive-transitive subclasses per class.
    descendants: Vec<Vec<usize>>,
}

/// A basic feature concept.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Feature {
    NamedClass(String),
    /// `∃r.⊤` for the named role.
    ExistentialRestriction(String),
}

impl Feature {
    /// Column name used in encoded datasets, e.g. `A` or `(r some Thing)`.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::NamedClass(c) => f.write_str(c),
            Feature::ExistentialRestriction(r) => write!(f, "({r} some Thing)"),
        }
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && !s.contains([',', '(', ')', '#', '"'])
}

enum Pending<'a> {
    Subclass(&'a str, &'a str),
    Disjoint(&'a str, &'a str),
    Closed(&'a str),
    Instance(&'a str, &'a str, bool),
    Rel(&'a str, &'a str, &'a str),
}

/// Parses the line-oriented assertion format.
pub fn parse_kb(source: &str) -> Result<KnowledgeBase> {
    let syntax = |line: usize, message: String| Error::KbSyntax { line, message };
    let mut kb = KnowledgeBase {
        classes: Vec::new(),
        class_index: HashMap::new(),
        roles: Vec::new(),
        role_index: HashMap::new(),
        closed: Vec::new(),
        individuals: Vec::new(),
        individual_index: HashMap::new(),
        subclass_axioms: Vec::new(),
        disjointness: Vec::new(),
        instance_assertions: Vec::new(),
        role_assertions: Vec::new(),
        parents: Vec::new(),
        ancestors: Vec::new(),
        descendants: Vec::new(),
    };
    let mut pending: Vec<(usize, Pending)> = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&directive, args)) = tokens.split_first() else {
            continue;
        };
        let arity = match directive {
            "class" | "role" | "closed" | "individual" => 1,
            "subclass" | "disjoint" | "instance" | "neg-instance" => 2,
            "rel" => 3,
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        };
        if args.len() != arity {
            return Err(syntax(
                line,
                format!("`{directive}` takes {arity} argument(s), found {}", args.len()),
            ));
        }
        if let Some(bad) = args.iter().find(|a| !valid_name(a)) {
            return Err(syntax(line, format!("invalid name `{bad}`")));
        }
        match directive {
            "class" => {
                intern(&mut kb.classes, &mut kb.class_index, args[0]);
            }
            "role" => {
                if intern(&mut kb.roles, &mut kb.role_index, args[0]) {
                    kb.closed.push(false);
                }
            }
            "individual" => {
                intern(&mut kb.individuals, &mut kb.individual_index, args[0]);
            }
            "subclass" => pending.push((line, Pending::Subclass(args[0], args[1]))),
            "disjoint" => pending.push((line, Pending::Disjoint(args[0], args[1]))),
            "closed" => pending.push((line, Pending::Closed(args[0]))),
            "instance" | "neg-instance" => {
                intern(&mut kb.individuals, &mut kb.individual_index, args[0]);
                pending.push((line, Pending::Instance(args[0], args[1], directive == "instance")));
            }
            "rel" => {
                intern(&mut kb.individuals, &mut kb.individual_index, args[1]);
                intern(&mut kb.individuals, &mut kb.individual_index, args[2]);
                pending.push((line, Pending::Rel(args[0], args[1], args[2])));
            }
            _ => unreachable!(),
        }
    }

    let class = |kb: &KnowledgeBase, line: usize, name: &str| {
        kb.class_index
            .get(name)
            .copied()
            .ok_or_else(|| syntax(line, format!("undeclared class `{name}`")))
    };
    let role = |kb: &KnowledgeBase, line: usize, name: &str| {
        kb.role_index
            .get(name)
            .copied()
            .ok_or_else(|| syntax(line, format!("undeclared role `{name}`")))
    };

    let n_classes = kb.classes.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (line, item) in &pending {
        let line = *line;
        match *item {
            Pending::Subclass(sub, sup) => {
                let (c, d) = (class(&kb, line, sub)?, class(&kb, line, sup)?);
                if c != d {
                    if reaches(&parents, d, c) {
                        return Err(syntax(
                            line,
                            format!("subclass cycle through `{sub}` and `{sup}`"),
                        ));
                    }
                    if !parents[c].contains(&d) {
                        parents[c].push(d);
                    }
                }
                kb.subclass_axioms.push((c, d));
            }
            Pending::Disjoint(a, b) => {
                let (c, d) = (class(&kb, line, a)?, class(&kb, line, b)?);
                let pair = (c.min(d), c.max(d));
                if !kb.disjointness.contains(&pair) {
                    kb.disjointness.push(pair);
                }
            }
            Pending::Closed(r) => {
                let r = role(&kb, line, r)?;
                kb.closed[r] = true;
            }
            Pending::Instance(a, c, positive) => {
                let assertion = InstanceAssertion {
                    individual: kb.individual_index[a],
                    class: class(&kb, line, c)?,
                    positive,
                };
                kb.instance_assertions.push(assertion);
            }
            Pending::Rel(r, a, b) => {
                let assertion = RoleAssertion {
                    role: role(&kb, line, r)?,
                    subject: kb.individual_index[a],
                    object: kb.individual_index[b],
                };
                kb.role_assertions.push(assertion);
            }
        }
    }

    kb.ancestors = (0..n_classes).map(|c| closure(&parents, c)).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    kb.descendants = (0..n_classes).map(|c| closure(&children, c)).collect();
    kb.parents = parents;
    Ok(kb)
}

fn intern(names: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str) -> bool {
    if index.contains_key(name) {
        return false;
    }
    index.insert(name.to_string(), names.len());
    names.push(name.to_string());
    true
}

fn reaches(edges: &[Vec<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; edges.len()];
    let mut stack = vec![from];
    while let Some(c) = stack.pop() {
        if c == to {
            return true;
        }
        if !std::mem::replace(&mut seen[c], true) {
            stack.extend(&edges[c]);
        }
    }
    false
}

/// Reflexive-transitive closure from `start`, sorted by class index.
fn closure(edges: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; edges.len()];
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        if !std::mem::replace(&mut seen[c], true) {
            stack.extend(&edges[c]);
        }
    }
    (0..edges.len()).filter(|&c| seen[c]).collect()
}

/// Derived memberships of one individual.
#[derive(Debug, Clone)]
struct Membership {
    positive: Vec<bool>,
    negative: Vec<bool>,
    has_role: Vec<bool>,
}

impl KnowledgeBase {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn roles(&self) -> &[String] {
        &self.roles
    }

    pub fn individuals(&self) -> &[String] {
        &self.individuals
    }

    pub fn is_closed(&self, role: &str) -> bool {
        self.role_index.get(role).is_some_and(|&r| self.closed[r])
    }

    pub fn subclass_axioms(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.subclass_axioms
            .iter()
            .map(|&(c, d)| (self.classes[c].as_str(), self.classes[d].as_str()))
    }

    pub fn disjointness(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.disjointness
            .iter()
            .map(|&(c, d)| (self.classes[c].as_str(), self.classes[d].as_str()))
    }

    pub fn instance_assertions(&self) -> &[InstanceAssertion] {
        &self.instance_assertions
    }

    pub fn role_assertions(&self) -> &[RoleAssertion] {
        &self.role_assertions
    }

    /// True when `sub ⊑* sup` in the reflexive-transitive subclass closure.
    pub fn is_subclass(&self, sub: &str, sup: &str) -> Result<bool> {
        let (c, d) = (self.class_id(sub)?, self.class_id(sup)?);
        Ok(self.ancestors[c].binary_search(&d).is_ok())
    }

    /// Number of edges on the longest chain of strict subclass axioms.
    pub fn subclass_depth(&self) -> usize {
        fn depth(parents: &[Vec<usize>], c: usize, memo: &mut [Option<usize>]) -> usize {
            if let Some(d) = memo[c] {
                return d;
            }
            let d = parents[c]
                .iter()
                .map(|&p| 1 + depth(parents, p, memo))
                .max()
                .unwrap_or(0);
            memo[c] = Some(d);
            d
        }
        let mut memo = vec![None; self.classes.len()];
        (0..self.classes.len())
            .map(|c| depth(&self.parents, c, &mut memo))
            .max()
            .unwrap_or(0)
    }

    fn class_id(&self, name: &str) -> Result<usize> {
        self.class_index.get(name).copied().ok_or_else(|| Error::Lookup {
            kind: "class",
            name: name.to_string(),
        })
    }

    fn role_id(&self, name: &str) -> Result<usize> {
        self.role_index.get(name).copied().ok_or_else(|| Error::Lookup {
            kind: "role",
            name: name.to_string(),
        })
    }

    fn individual_id(&self, name: &str) -> Result<usize> {
        self.individual_index.get(name).copied().ok_or_else(|| Error::Lookup {
            kind: "individual",
            name: name.to_string(),
        })
    }

    fn membership(&self, a: usize) -> Result<Membership> {
        let n = self.classes.len();
        let mut positive = vec![false; n];
        let mut negative = vec![false; n];
        for asr in self.instance_assertions.iter().filter(|x| x.individual == a) {
            if asr.positive {
                for &b in &self.ancestors[asr.class] {
                    positive[b] = true;
                }
            } else {
                for &b in &self.descendants[asr.class] {
                    negative[b] = true;
                }
            }
        }
        for &(c, d) in &self.disjointness {
            for (member, other) in [(c, d), (d, c)] {
                if positive[member] {
                    for &b in &self.descendants[other] {
                        negative[b] = true;
                    }
                }
            }
        }
        if let Some(c) = (0..n).find(|&c| positive[c] && negative[c]) {
            return Err(Error::Inconsistent {
                individual: self.individuals[a].clone(),
                feature: self.classes[c].clone(),
            });
        }
        let mut has_role = vec![false; self.roles.len()];
        for ra in self.role_assertions.iter().filter(|x| x.subject == a) {
            has_role[ra.role] = true;
        }
        Ok(Membership {
            positive,
            negative,
            has_role,
        })
    }

    fn evaluate(&self, m: &Membership, feature: &Feature) -> Result<Ternary> {
        Ok(match feature {
            Feature::NamedClass(c) => {
                let c = self.class_id(c)?;
                if m.positive[c] {
                    Ternary::True
                } else if m.negative[c] {
                    Ternary::False
                } else {
                    Ternary::Unknown
                }
            }
            Feature::ExistentialRestriction(r) => {
                let r = self.role_id(r)?;
                if m.has_role[r] {
                    Ternary::True
                } else if self.closed[r] {
                    Ternary::False
                } else {
                    Ternary::Unknown
                }
            }
        })
    }

    /// The asserted fact and subclass chain that derive a True cell, or
    /// `None` when the cell is not True.
    pub fn justify(&self, individual: &str, feature: &Feature) -> Result<Option<Vec<String>>> {
        let a = self.individual_id(individual)?;
        match feature {
            Feature::NamedClass(target) => {
                let target = self.class_id(target)?;
                let mut best: Option<Vec<usize>> = None;
                for asr in self
                    .instance_assertions
                    .iter()
                    .filter(|x| x.individual == a && x.positive)
                {
                    if let Some(path) = self.shortest_chain(asr.class, target) {
                        if best.as_ref().is_none_or(|b| path.len() < b.len()) {
                            best = Some(path);
                        }
                    }
                }
                Ok(best.map(|p| p.into_iter().map(|c| self.classes[c].clone()).collect()))
            }
            Feature::ExistentialRestriction(r) => {
                let r = self.role_id(r)?;
                Ok(self
                    .role_assertions
                    .iter()
                    .find(|x| x.subject == a && x.role == r)
                    .map(|x| {
                        vec![format!(
                            "{} {} {}",
                            self.roles[r], self.individuals[a], self.individuals[x.object]
                        )]
                    }))
            }
        }
    }

    fn shortest_chain(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.classes.len()];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(c) = queue.pop_front() {
            if c == to {
                let mut path = vec![c];
                let mut cur = c;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &p in &self.parents[c] {
                if prev[p] == usize::MAX {
                    prev[p] = c;
                    queue.push_back(p);
                }
            }
        }
        None
    }
}

/// Leaf classes in declaration order, then one `∃r.⊤` per role in
/// declaration order.
pub fn generate_features(kb: &KnowledgeBase) -> Vec<Feature> {
    let leaves = (0..kb.classes.len())
        .filter(|&c| kb.descendants[c].len() == 1)
        .map(|c| Feature::NamedClass(kb.classes[c].clone()));
    let roles = kb
        .roles
        .iter()
        .map(|r| Feature::ExistentialRestriction(r.clone()));
    leaves.chain(roles).collect()
}

/// Open-world membership of `individual` in `feature`.
pub fn entail(kb: &KnowledgeBase, individual: &str, feature: &Feature) -> Result<Ternary> {
    let a = kb.individual_id(individual)?;
    let m = kb.membership(a)?;
    kb.evaluate(&m, feature)
}

/// Encodes every individual, in declaration order, as a ternary row.
pub fn encode_individuals(kb: &KnowledgeBase, features: &[Feature]) -> Result<Dataset> {
    if features.is_empty() {
        return Err(crate::error::invalid("features", "at least one feature is required"));
    }
    let mut rows = Vec::with_capacity(kb.individuals.len());
    for a in 0..kb.individuals.len() {
        let m = kb.membership(a)?;
        let row = features
            .iter()
            .map(|f| kb.evaluate(&m, f))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Dataset::new(
        features.iter().map(Feature::name).collect(),
        rows,
        None,
        Some(kb.individuals.clone()),
    )
}
