//! The CSP source calculus: syntax, parser and operational semantics.

mod parse;
mod sem;

pub use parse::{parse_csp, CspParseError};
pub use sem::{
    barbs, conflicts_csp, distributable_components, has_success, labelled_steps, reductions,
    same_sum, unguarded_prefix_occs, CspLabel, CspStep,
};

use std::collections::BTreeSet;
use std::fmt;

use crate::names::{Name, OccGen, OccId};

/// One branch of an external choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub action: Name,
    pub cont: CspTerm,
    pub occ: OccId,
}

/// CSP process terms. Prefixes occur only as summands of [`CspTerm::ExtSum`];
/// a lone prefix is a one-element sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CspTerm {
    Stop,
    Div,
    Success,
    Var(String),
    Rec {
        var: String,
        body: Box<CspTerm>,
    },
    Parallel {
        left: Box<CspTerm>,
        right: Box<CspTerm>,
        sync: BTreeSet<Name>,
    },
    InternalChoice(Box<CspTerm>, Box<CspTerm>),
    Conceal {
        body: Box<CspTerm>,
        name: Name,
    },
    /// Finite renaming map, identity outside its domain. Pairs are
    /// `(from, to)`, sorted by domain name; domain entries are distinct.
    Rename {
        body: Box<CspTerm>,
        map: Vec<(Name, Name)>,
    },
    /// Non-empty list of summands.
    ExtSum(Vec<Summand>),
}

impl CspTerm {
    pub fn prefix(action: Name, cont: CspTerm, gen: &mut OccGen) -> CspTerm {
        CspTerm::ExtSum(vec![Summand { action, cont, occ: gen.next() }])
    }

    /// Free source names, as a safe superset: sync sets, concealed names and
    /// renaming domains/ranges are all included.
    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free_names(&mut out);
        out
    }

    fn collect_free_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            CspTerm::Stop | CspTerm::Div | CspTerm::Success | CspTerm::Var(_) => {}
            CspTerm::Rec { body, .. } => body.collect_free_names(out),
            CspTerm::Parallel { left, right, sync } => {
                left.collect_free_names(out);
                right.collect_free_names(out);
                out.extend(sync.iter().copied());
            }
            CspTerm::InternalChoice(l, r) => {
                l.collect_free_names(out);
                r.collect_free_names(out);
            }
            CspTerm::Conceal { body, name } => {
                body.collect_free_names(out);
                out.insert(*name);
            }
            CspTerm::Rename { body, map } => {
                body.collect_free_names(out);
                for (x, z) in map {
                    out.insert(*x);
                    out.insert(*z);
                }
            }
            CspTerm::ExtSum(sums) => {
                for s in sums {
                    out.insert(s.action);
                    s.cont.collect_free_names(out);
                }
            }
        }
    }

    /// Free process variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(t: &CspTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                CspTerm::Var(x) => {
                    if !bound.iter().any(|b| b == x) {
                        out.insert(x.clone());
                    }
                }
                CspTerm::Rec { var, body } => {
                    bound.push(var.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                CspTerm::Parallel { left, right, .. } => {
                    go(left, bound, out);
                    go(right, bound, out);
                }
                CspTerm::InternalChoice(l, r) => {
                    go(l, bound, out);
                    go(r, bound, out);
                }
                CspTerm::Conceal { body, .. } | CspTerm::Rename { body, .. } => go(body, bound, out),
                CspTerm::ExtSum(sums) => {
                    for s in sums {
                        go(&s.cont, bound, out);
                    }
                }
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Largest occurrence id in the term, for allocating fresh ones.
    pub fn max_occ(&self) -> u64 {
        let mut m = 0;
        self.visit_prefixes(&mut |s: &Summand| m = m.max(s.occ.0));
        m
    }

    pub fn visit_prefixes(&self, f: &mut impl FnMut(&Summand)) {
        match self {
            CspTerm::Rec { body, .. }
            | CspTerm::Conceal { body, .. }
            | CspTerm::Rename { body, .. } => body.visit_prefixes(f),
            CspTerm::Parallel { left, right, .. } => {
                left.visit_prefixes(f);
                right.visit_prefixes(f);
            }
            CspTerm::InternalChoice(l, r) => {
                l.visit_prefixes(f);
                r.visit_prefixes(f);
            }
            CspTerm::ExtSum(sums) => {
                for s in sums {
                    f(s);
                    s.cont.visit_prefixes(f);
                }
            }
            _ => {}
        }
    }

    /// Clone with every occurrence id replaced by a fresh one.
    pub fn clone_fresh_occs(&self, gen: &mut OccGen) -> CspTerm {
        match self {
            CspTerm::Stop => CspTerm::Stop,
            CspTerm::Div => CspTerm::Div,
            CspTerm::Success => CspTerm::Success,
            CspTerm::Var(x) => CspTerm::Var(x.clone()),
            CspTerm::Rec { var, body } => CspTerm::Rec {
                var: var.clone(),
                body: Box::new(body.clone_fresh_occs(gen)),
            },
            CspTerm::Parallel { left, right, sync } => CspTerm::Parallel {
                left: Box::new(left.clone_fresh_occs(gen)),
                right: Box::new(right.clone_fresh_occs(gen)),
                sync: sync.clone(),
            },
            CspTerm::InternalChoice(l, r) => CspTerm::InternalChoice(
                Box::new(l.clone_fresh_occs(gen)),
                Box::new(r.clone_fresh_occs(gen)),
            ),
            CspTerm::Conceal { body, name } => CspTerm::Conceal {
                body: Box::new(body.clone_fresh_occs(gen)),
                name: *name,
            },
            CspTerm::Rename { body, map } => CspTerm::Rename {
                body: Box::new(body.clone_fresh_occs(gen)),
                map: map.clone(),
            },
            CspTerm::ExtSum(sums) => CspTerm::ExtSum(
                sums.iter()
                    .map(|s| Summand {
                        action: s.action,
                        cont: s.cont.clone_fresh_occs(gen),
                        occ: gen.next(),
                    })
                    .collect(),
            ),
        }
    }

    /// Capture-avoiding substitution of `repl` for free `var`. Every
    /// substituted copy gets fresh occurrence ids.
    pub fn subst_var(&self, var: &str, repl: &CspTerm, gen: &mut OccGen) -> CspTerm {
        match self {
            CspTerm::Var(x) if x == var => repl.clone_fresh_occs(gen),
            CspTerm::Var(_) | CspTerm::Stop | CspTerm::Div | CspTerm::Success => self.clone(),
            CspTerm::Rec { var: v, body } => {
                if v == var {
                    self.clone()
                } else if repl.free_vars().contains(v) {
                    // Rename the binder away from the replacement's free vars.
                    let mut fresh = format!("{v}_1");
                    let mut i = 1;
                    let avoid: BTreeSet<String> = repl
                        .free_vars()
                        .union(&body.free_vars())
                        .cloned()
                        .collect();
                    while avoid.contains(&fresh) {
                        i += 1;
                        fresh = format!("{v}_{i}");
                    }
                    let renamed = body.subst_var(v, &CspTerm::Var(fresh.clone()), gen);
                    CspTerm::Rec {
                        var: fresh,
                        body: Box::new(renamed.subst_var(var, repl, gen)),
                    }
                } else {
                    CspTerm::Rec {
                        var: v.clone(),
                        body: Box::new(body.subst_var(var, repl, gen)),
                    }
                }
            }
            CspTerm::Parallel { left, right, sync } => CspTerm::Parallel {
                left: Box::new(left.subst_var(var, repl, gen)),
                right: Box::new(right.subst_var(var, repl, gen)),
                sync: sync.clone(),
            },
            CspTerm::InternalChoice(l, r) => CspTerm::InternalChoice(
                Box::new(l.subst_var(var, repl, gen)),
                Box::new(r.subst_var(var, repl, gen)),
            ),
            CspTerm::Conceal { body, name } => CspTerm::Conceal {
                body: Box::new(body.subst_var(var, repl, gen)),
                name: *name,
            },
            CspTerm::Rename { body, map } => CspTerm::Rename {
                body: Box::new(body.subst_var(var, repl, gen)),
                map: map.clone(),
            },
            CspTerm::ExtSum(sums) => CspTerm::ExtSum(
                sums.iter()
                    .map(|s| Summand {
                        action: s.action,
                        cont: s.cont.subst_var(var, repl, gen),
                        occ: s.occ,
                    })
                    .collect(),
            ),
        }
    }

    /// State identity: structural form with occurrence ids stripped and
    /// recursion binders de-Bruijn-numbered, so unfoldings of the same term
    /// collapse to one state.
    pub fn state_key(&self) -> String {
        fn go(t: &CspTerm, env: &mut Vec<String>, out: &mut String) {
            match t {
                CspTerm::Stop => out.push_str("0"),
                CspTerm::Div => out.push_str("D"),
                CspTerm::Success => out.push_str("S"),
                CspTerm::Var(x) => match env.iter().rposition(|v| v == x) {
                    Some(i) => {
                        out.push('$');
                        out.push_str(&(env.len() - 1 - i).to_string());
                    }
                    None => {
                        out.push('V');
                        out.push_str(x);
                    }
                },
                CspTerm::Rec { var, body } => {
                    out.push('u');
                    env.push(var.clone());
                    go(body, env, out);
                    env.pop();
                }
                CspTerm::Parallel { left, right, sync } => {
                    out.push_str("P[");
                    for n in sync {
                        out.push_str(n.key());
                        out.push(',');
                    }
                    out.push(']');
                    out.push('(');
                    go(left, env, out);
                    out.push('|');
                    go(right, env, out);
                    out.push(')');
                }
                CspTerm::InternalChoice(l, r) => {
                    out.push_str("I(");
                    go(l, env, out);
                    out.push('|');
                    go(r, env, out);
                    out.push(')');
                }
                CspTerm::Conceal { body, name } => {
                    out.push_str("C[");
                    out.push_str(name.key());
                    out.push_str("](");
                    go(body, env, out);
                    out.push(')');
                }
                CspTerm::Rename { body, map } => {
                    out.push_str("R[");
                    for (x, z) in map {
                        out.push_str(x.key());
                        out.push('>');
                        out.push_str(z.key());
                        out.push(',');
                    }
                    out.push_str("](");
                    go(body, env, out);
                    out.push(')');
                }
                CspTerm::ExtSum(sums) => {
                    out.push_str("E(");
                    for s in sums {
                        out.push_str(s.action.key());
                        out.push_str("->");
                        go(&s.cont, env, out);
                        out.push(';');
                    }
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// True if the two terms are equal up to occurrence ids and recursion
    /// binder names.
    pub fn same_term(&self, other: &CspTerm) -> bool {
        self.state_key() == other.state_key()
    }

    fn prec(&self) -> u8 {
        match self {
            CspTerm::Parallel { .. } => 0,
            CspTerm::InternalChoice(..) => 1,
            CspTerm::ExtSum(s) if s.len() > 1 => 2,
            CspTerm::Conceal { .. } | CspTerm::Rename { .. } => 3,
            CspTerm::ExtSum(_) => 4,
            CspTerm::Rec { .. } => 0,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let needs_parens = self.prec() < min;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            CspTerm::Stop => write!(f, "STOP")?,
            CspTerm::Div => write!(f, "DIV")?,
            CspTerm::Success => write!(f, "SUCCESS")?,
            CspTerm::Var(x) => write!(f, "{x}")?,
            CspTerm::Rec { var, body } => {
                write!(f, "mu {var} . ")?;
                body.fmt_prec(f, 0)?;
            }
            CspTerm::Parallel { left, right, sync } => {
                left.fmt_prec(f, 1)?;
                let names: Vec<&str> = sync.iter().map(|n| n.display()).collect();
                write!(f, " [|{{{}}}|] ", names.join(", "))?;
                right.fmt_prec(f, 1)?;
            }
            CspTerm::InternalChoice(l, r) => {
                l.fmt_prec(f, 2)?;
                write!(f, " |~| ")?;
                r.fmt_prec(f, 2)?;
            }
            CspTerm::Conceal { body, name } => {
                body.fmt_prec(f, 3)?;
                write!(f, " \\ {}", name.display())?;
            }
            CspTerm::Rename { body, map } => {
                body.fmt_prec(f, 3)?;
                let pairs: Vec<String> = map
                    .iter()
                    .map(|(x, z)| format!("{} := {}", x.display(), z.display()))
                    .collect();
                write!(f, "[[{}]]", pairs.join(", "))?;
            }
            CspTerm::ExtSum(sums) => {
                for (i, s) in sums.iter().enumerate() {
                    if i > 0 {
                        write!(f, " [] ")?;
                    }
                    write!(f, "{} -> ", s.action.display())?;
                    s.cont.fmt_prec(f, 4)?;
                }
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for CspTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
