//! The name universe shared by both calculi.
//!
//! Names are interned; a [`Name`] is a cheap copyable handle. Four kinds
//! exist: source names (from parsed CSP input), reserved names (the fixed
//! coordination vocabulary plus the `x_<VAR>` images of process variables),
//! policy names (the three target names generated for each source name) and
//! variants (fresh instances of reserved or policy names used as binders).

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use serde::Serialize;

/// Reserved base names. Everything the encodings bind or coordinate on is a
/// variant of one of these (or of a policy name).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reserved {
    /// `act` — announce the ability to perform an action.
    Act,
    /// `act'` — bridge announcements over a restriction on `act`.
    ActP,
    /// `c` — translated source channel (parameter position).
    Ch,
    /// `lc` / `rc` — channel from the left/right of a parallel operator.
    LCh,
    RCh,
    /// `z` — concealed channel.
    Z,
    /// `l` / `ll` / `rl` — Boolean locks.
    Lock,
    LLock,
    RLock,
    /// `l'` — re-arm a lock tester / re-instantiate a positive sum lock.
    LockP,
    /// `r` / `lr` / `rr` — request the computation of a lock value.
    Req,
    LReq,
    RReq,
    /// `s` / `ls` / `rs` — simulate a step and unguard continuations.
    Sim,
    LSim,
    RSim,
    /// `next` — order left announcements that need synchronisation.
    Next,
    /// `syn` / `syn'` — distribute right announcements.
    Syn,
    SynP,
    /// `v` — Boolean value placeholder (never used as a channel).
    BoolV,
    /// `tau` — tag announcing internal steps that result from concealment.
    Tau,
    /// `once` — serialises simulation attempts in the centralised encoding.
    Once,
    /// `mc` — internal choice.
    Much,
    /// `rep` — divergence.
    Rep,
    /// `t` / `f` — Boolean values.
    T,
    F,
    /// `x_<VAR>` — image of a process variable under the variable map.
    ProcVar(String),
}

impl Reserved {
    pub fn spelling(&self) -> String {
        match self {
            Reserved::Act => "act".into(),
            Reserved::ActP => "act'".into(),
            Reserved::Ch => "c".into(),
            Reserved::LCh => "lc".into(),
            Reserved::RCh => "rc".into(),
            Reserved::Z => "z".into(),
            Reserved::Lock => "l".into(),
            Reserved::LLock => "ll".into(),
            Reserved::RLock => "rl".into(),
            Reserved::LockP => "l'".into(),
            Reserved::Req => "r".into(),
            Reserved::LReq => "lr".into(),
            Reserved::RReq => "rr".into(),
            Reserved::Sim => "s".into(),
            Reserved::LSim => "ls".into(),
            Reserved::RSim => "rs".into(),
            Reserved::Next => "next".into(),
            Reserved::Syn => "syn".into(),
            Reserved::SynP => "syn'".into(),
            Reserved::BoolV => "v".into(),
            Reserved::Tau => "tau".into(),
            Reserved::Once => "once".into(),
            Reserved::Much => "mc".into(),
            Reserved::Rep => "rep".into(),
            Reserved::T => "t".into(),
            Reserved::F => "f".into(),
            Reserved::ProcVar(x) => format!("x_{x}"),
        }
    }

    /// All fixed reserved names (the process-variable images are an
    /// infinite family on top of these).
    pub fn table() -> Vec<Reserved> {
        use Reserved::*;
        vec![
            Act, ActP, Ch, LCh, RCh, Z, Lock, LLock, RLock, LockP, Req, LReq, RReq, Sim, LSim,
            RSim, Next, Syn, SynP, BoolV, Tau, Once, Much, Rep, T, F,
        ]
    }

    pub fn from_spelling(s: &str) -> Option<Reserved> {
        if let Some(v) = s.strip_prefix("x_") {
            if !v.is_empty() {
                return Some(Reserved::ProcVar(v.to_string()));
            }
        }
        Reserved::table().into_iter().find(|r| r.spelling() == s)
    }
}

/// Compact base classification used by step classifiers and probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseClass {
    Act,
    ActP,
    Ch,
    LCh,
    RCh,
    Z,
    Lock,
    LLock,
    RLock,
    LockP,
    Req,
    LReq,
    RReq,
    Sim,
    LSim,
    RSim,
    Next,
    Syn,
    SynP,
    BoolV,
    Tau,
    Once,
    Much,
    Rep,
    T,
    F,
    ProcVar,
    Source,
    Policy,
}

fn class_of(r: &Reserved) -> BaseClass {
    match r {
        Reserved::Act => BaseClass::Act,
        Reserved::ActP => BaseClass::ActP,
        Reserved::Ch => BaseClass::Ch,
        Reserved::LCh => BaseClass::LCh,
        Reserved::RCh => BaseClass::RCh,
        Reserved::Z => BaseClass::Z,
        Reserved::Lock => BaseClass::Lock,
        Reserved::LLock => BaseClass::LLock,
        Reserved::RLock => BaseClass::RLock,
        Reserved::LockP => BaseClass::LockP,
        Reserved::Req => BaseClass::Req,
        Reserved::LReq => BaseClass::LReq,
        Reserved::RReq => BaseClass::RReq,
        Reserved::Sim => BaseClass::Sim,
        Reserved::LSim => BaseClass::LSim,
        Reserved::RSim => BaseClass::RSim,
        Reserved::Next => BaseClass::Next,
        Reserved::Syn => BaseClass::Syn,
        Reserved::SynP => BaseClass::SynP,
        Reserved::BoolV => BaseClass::BoolV,
        Reserved::Tau => BaseClass::Tau,
        Reserved::Once => BaseClass::Once,
        Reserved::Much => BaseClass::Much,
        Reserved::Rep => BaseClass::Rep,
        Reserved::T => BaseClass::T,
        Reserved::F => BaseClass::F,
        Reserved::ProcVar(_) => BaseClass::ProcVar,
    }
}

/// Structural name data, the interning key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NameData {
    Source(String),
    Reserved(Reserved),
    /// `src` must be a source name; slot is 1, 2 or 3.
    Policy { src: Name, slot: u8 },
    /// `base` must be a reserved or policy name; instances never repeat
    /// within one policy instance.
    Variant { base: Name, instance: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Source,
    Reserved,
    Policy,
    Variant,
}

struct Entry {
    data: NameData,
    display: &'static str,
    /// Kind-tagged key: injective over all names, used for deterministic
    /// ordering independent of interning order.
    key: &'static str,
    kind: Kind,
    base: Option<Name>,
    slot: u8,
    instance: u32,
    class: BaseClass,
}

#[derive(Default)]
struct Interner {
    map: HashMap<NameData, u32>,
    items: Vec<&'static Entry>,
}

static TABLE: OnceLock<RwLock<Interner>> = OnceLock::new();

fn table() -> &'static RwLock<Interner> {
    TABLE.get_or_init(|| RwLock::new(Interner::default()))
}

/// An interned name. Equality and hashing are structural (one id per
/// [`NameData`]); ordering is by the kind-tagged display key so that all
/// sorted output is stable across runs.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Name(u32);

impl Name {
    fn intern(data: NameData) -> Name {
        {
            let t = table().read().unwrap();
            if let Some(&id) = t.map.get(&data) {
                return Name(id);
            }
        }
        let mut t = table().write().unwrap();
        if let Some(&id) = t.map.get(&data) {
            return Name(id);
        }
        let (display, key, kind, base, slot, instance, class) = match &data {
            NameData::Source(s) => (s.clone(), format!("s:{s}"), Kind::Source, None, 0, 0, BaseClass::Source),
            NameData::Reserved(r) => {
                let d = r.spelling();
                (d.clone(), format!("r:{d}"), Kind::Reserved, None, 0, 0, class_of(r))
            }
            NameData::Policy { src, slot } => {
                let d = format!("{}#{}", src.display(), slot);
                (d.clone(), format!("p:{d}"), Kind::Policy, Some(*src), *slot, 0, BaseClass::Policy)
            }
            NameData::Variant { base, instance } => {
                let d = format!("{}%{}", base.display(), instance);
                (d.clone(), format!("v:{d}"), Kind::Variant, Some(*base), 0, *instance, base.class())
            }
        };
        let id = t.items.len() as u32;
        let entry: &'static Entry = Box::leak(Box::new(Entry {
            data: data.clone(),
            display: Box::leak(display.into_boxed_str()),
            key: Box::leak(key.into_boxed_str()),
            kind,
            base,
            slot,
            instance,
            class,
        }));
        t.items.push(entry);
        t.map.insert(data, id);
        Name(id)
    }

    fn entry(self) -> &'static Entry {
        table().read().unwrap().items[self.0 as usize]
    }

    pub fn source(s: &str) -> Name {
        Name::intern(NameData::Source(s.to_string()))
    }

    pub fn reserved(r: Reserved) -> Name {
        Name::intern(NameData::Reserved(r))
    }

    pub fn proc_var(x: &str) -> Name {
        Name::intern(NameData::Reserved(Reserved::ProcVar(x.to_string())))
    }

    pub fn policy(src: Name, slot: u8) -> Name {
        debug_assert!(src.kind() == Kind::Source && (1..=3).contains(&slot));
        Name::intern(NameData::Policy { src, slot })
    }

    pub fn variant(base: Name, instance: u32) -> Name {
        debug_assert!(matches!(base.kind(), Kind::Reserved | Kind::Policy));
        Name::intern(NameData::Variant { base, instance })
    }

    pub fn data(self) -> NameData {
        self.entry().data.clone()
    }

    pub fn display(self) -> &'static str {
        self.entry().display
    }

    /// Kind-tagged key, injective over all names.
    pub fn key(self) -> &'static str {
        self.entry().key
    }

    pub fn kind(self) -> Kind {
        self.entry().kind
    }

    /// Base classification: for variants, the class of the base name.
    pub fn class(self) -> BaseClass {
        self.entry().class
    }

    pub fn is_variant_of(self, base: Name) -> bool {
        self.kind() == Kind::Variant && self.entry().base == Some(base)
    }

    /// The base of a variant, or the name itself otherwise.
    pub fn base(self) -> Name {
        match self.kind() {
            Kind::Variant => self.entry().base.unwrap(),
            _ => self,
        }
    }

    /// For policy names (or variants of policy names): the source name and slot.
    pub fn policy_src_slot(self) -> Option<(Name, u8)> {
        let b = self.base();
        if b.kind() == Kind::Policy {
            let e = b.entry();
            Some((e.base.unwrap(), e.slot))
        } else {
            None
        }
    }

    pub fn instance(self) -> u32 {
        self.entry().instance
    }

    /// True for the `tau` tag or a variant of it.
    pub fn is_tau_tag(self) -> bool {
        self.class() == BaseClass::Tau
    }

    /// Parse a displayed name back into its structured form. Reserved
    /// spellings (including `x_<VAR>`) resolve to reserved names; everything
    /// else is a source name. `#` and `%` suffixes build policy names and
    /// variants.
    pub fn parse(text: &str) -> Option<Name> {
        let (stem, instance) = match text.rsplit_once('%') {
            Some((stem, inst)) => (stem, Some(inst.parse::<u32>().ok()?)),
            None => (text, None),
        };
        let base = match stem.split_once('#') {
            Some((src, slot)) => {
                let slot: u8 = slot.parse().ok()?;
                if !(1..=3).contains(&slot) {
                    return None;
                }
                if Reserved::from_spelling(src).is_some() {
                    return None;
                }
                Name::policy(Name::source(src), slot)
            }
            None => match Reserved::from_spelling(stem) {
                Some(r) => Name::reserved(r),
                None => Name::source(stem),
            },
        };
        match instance {
            Some(i) => {
                if base.kind() == Kind::Source {
                    return None;
                }
                Some(Name::variant(base, i))
            }
            None => Some(base),
        }
    }
}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Name {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self == other {
            std::cmp::Ordering::Equal
        } else {
            self.key().cmp(other.key())
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl Serialize for Name {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.display())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("renaming policy applied to non-source name `{0}`")]
    NotSource(Name),
    #[error("fresh variant requested for non-reserved, non-policy base `{0}`")]
    BadVariantBase(Name),
}

/// The renaming policy: maps each source name to a triple of target names,
/// process variables to reserved `x_<VAR>` names, and issues fresh variants
/// of reserved and policy names from a single monotone counter.
#[derive(Debug, Clone)]
pub struct RenamingPolicy {
    next_instance: u32,
}

impl Default for RenamingPolicy {
    fn default() -> Self {
        Self::new()
    }
}

impl RenamingPolicy {
    pub fn new() -> Self {
        RenamingPolicy { next_instance: 1 }
    }

    /// The ordered triple of target names for a source name. Conditions 1
    /// (disjoint from reserved names) and 2 (pairwise disjoint triples) hold
    /// by construction of the tagging.
    pub fn triple(&self, n: Name) -> Result<[Name; 3], PolicyError> {
        if n.kind() != Kind::Source {
            return Err(PolicyError::NotSource(n));
        }
        Ok([Name::policy(n, 1), Name::policy(n, 2), Name::policy(n, 3)])
    }

    /// The variable map: `X` to the reserved name `x_X`.
    pub fn var_name(&self, x: &str) -> Name {
        Name::proc_var(x)
    }

    /// A variant never issued before by this policy instance.
    pub fn fresh_variant(&mut self, base: Name) -> Result<Name, PolicyError> {
        if !matches!(base.kind(), Kind::Reserved | Kind::Policy) {
            return Err(PolicyError::BadVariantBase(base));
        }
        let i = self.next_instance;
        self.next_instance += 1;
        Ok(Name::variant(base, i))
    }

    pub fn fresh_reserved(&mut self, r: Reserved) -> Name {
        self.fresh_variant(Name::reserved(r)).unwrap()
    }

    /// Counter state, so exploration can continue issuing fresh instances
    /// above everything the encoder used.
    pub fn next_instance(&self) -> u32 {
        self.next_instance
    }

    pub fn set_next_instance(&mut self, v: u32) {
        self.next_instance = self.next_instance.max(v);
    }
}

/// Occurrence identities for prefix/output nodes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OccId(pub u64);

impl fmt::Debug for OccId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Monotone occurrence-id supply.
#[derive(Debug, Default, Clone)]
pub struct OccGen {
    next: u64,
}

impl OccGen {
    pub fn starting_at(v: u64) -> Self {
        OccGen { next: v }
    }

    pub fn next(&mut self) -> OccId {
        let id = OccId(self.next);
        self.next += 1;
        id
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn policy_triple_is_three_distinct_tagged_names() {
        let p = RenamingPolicy::new();
        let a = Name::source("a");
        let t = p.triple(a).unwrap();
        assert_eq!(t[0].display(), "a#1");
        assert_eq!(t[1].display(), "a#2");
        assert_eq!(t[2].display(), "a#3");
        let set: BTreeSet<_> = t.iter().collect();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn triples_of_distinct_sources_are_disjoint() {
        let p = RenamingPolicy::new();
        let ta = p.triple(Name::source("a")).unwrap();
        let tb = p.triple(Name::source("b")).unwrap();
        for x in ta {
            assert!(!tb.contains(&x));
        }
    }

    #[test]
    fn policy_rejects_non_source() {
        let p = RenamingPolicy::new();
        assert!(p.triple(Name::reserved(Reserved::Act)).is_err());
        assert!(p.triple(Name::policy(Name::source("a"), 1)).is_err());
    }

    #[test]
    fn source_spelled_once_is_not_reserved() {
        let p = RenamingPolicy::new();
        let once_src = Name::source("once");
        let t = p.triple(once_src).unwrap();
        let reserved: Vec<Name> = Reserved::table().into_iter().map(Name::reserved).collect();
        for x in t {
            assert!(!reserved.contains(&x), "{x} collides with a reserved name");
        }
        assert_ne!(once_src, Name::reserved(Reserved::Once));
    }

    #[test]
    fn var_names_injective_and_disjoint_from_triples() {
        let p = RenamingPolicy::new();
        let vx = p.var_name("X");
        let vy = p.var_name("Y");
        assert_eq!(vx, p.var_name("X"));
        assert_ne!(vx, vy);
        assert_eq!(vx.display(), "x_X");
        for src in ["a", "b", "x", "x_X"] {
            let t = p.triple(Name::source(src)).unwrap();
            assert!(!t.contains(&vx));
        }
    }

    #[test]
    fn fresh_variants_distinct_and_classified() {
        let mut p = RenamingPolicy::new();
        let l = Name::reserved(Reserved::Lock);
        let v1 = p.fresh_variant(l).unwrap();
        let v2 = p.fresh_variant(l).unwrap();
        assert_ne!(v1, v2);
        assert!(v1.is_variant_of(l));
        assert!(!v1.is_variant_of(Name::reserved(Reserved::Sim)));
        assert_eq!(v1.class(), BaseClass::Lock);
        let s = p.fresh_reserved(Reserved::Sim);
        assert!(s.is_variant_of(Name::reserved(Reserved::Sim)));

        let mut seen = BTreeSet::new();
        for _ in 0..1000 {
            assert!(seen.insert(p.fresh_variant(l).unwrap()));
        }
    }

    #[test]
    fn universe_pairwise_distinct() {
        let mut p = RenamingPolicy::new();
        let mut all: Vec<Name> = Vec::new();
        for s in ["a", "b", "c", "d", "once", "act"] {
            all.extend(p.triple(Name::source(s)).unwrap());
            all.push(Name::source(s));
        }
        for v in ["X", "Y"] {
            all.push(p.var_name(v));
        }
        all.extend(Reserved::table().into_iter().map(Name::reserved));
        for r in [Reserved::Lock, Reserved::Req, Reserved::Act] {
            all.push(p.fresh_reserved(r));
        }
        let set: BTreeSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        // Display keys are injective over the universe.
        let keys: BTreeSet<_> = all.iter().map(|n| n.key()).collect();
        assert_eq!(keys.len(), all.len());
    }

    #[test]
    fn display_roundtrip() {
        let mut p = RenamingPolicy::new();
        let names = vec![
            Name::source("a"),
            Name::source("hello_1"),
            Name::reserved(Reserved::ActP),
            Name::reserved(Reserved::SynP),
            Name::policy(Name::source("a"), 2),
            p.fresh_reserved(Reserved::LockP),
            p.fresh_variant(Name::policy(Name::source("b"), 3)).unwrap(),
            Name::proc_var("X"),
            p.fresh_variant(Name::proc_var("X")).unwrap(),
        ];
        for n in names {
            assert_eq!(Name::parse(n.display()), Some(n), "roundtrip of {}", n.display());
        }
    }

    #[test]
    fn ordering_is_by_key() {
        let a = Name::source("b");
        let b = Name::source("a");
        assert!(b < a);
        let mut v = vec![a, b];
        v.sort();
        assert_eq!(v, vec![b, a]);
    }
}
