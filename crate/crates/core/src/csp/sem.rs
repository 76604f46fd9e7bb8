//! Labelled SOS semantics, reduction semantics, barbs, success and the
//! conflict/distributability analysis for CSP terms.

use std::collections::BTreeSet;

use super::CspTerm;
use crate::names::{Name, OccGen, OccId};

/// A transition label: a named action or the internal step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CspLabel {
    Act(Name),
    Tau,
}

impl std::fmt::Display for CspLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CspLabel::Act(a) => write!(f, "{a}"),
            CspLabel::Tau => write!(f, "tau"),
        }
    }
}

/// One labelled step: label, successor and the set of prefix occurrences
/// consumed. The redex is empty for internal choice, divergence and
/// recursion unfolding; the derived internal step of concealment keeps the
/// underlying redex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspStep {
    pub label: CspLabel,
    pub target: CspTerm,
    pub redex: BTreeSet<OccId>,
}

/// Exact rule-by-rule enumeration of the labelled transitions of a term.
pub fn labelled_steps(p: &CspTerm) -> Vec<CspStep> {
    let mut gen = OccGen::starting_at(p.max_occ() + 1);
    let mut steps = steps_inner(p, &mut gen);
    steps.sort_by(|a, b| {
        (a.label, &a.redex, a.target.state_key()).cmp(&(b.label, &b.redex, b.target.state_key()))
    });
    steps.dedup_by(|a, b| {
        a.label == b.label && a.redex == b.redex && a.target.same_term(&b.target)
    });
    steps
}

fn steps_inner(p: &CspTerm, gen: &mut OccGen) -> Vec<CspStep> {
    match p {
        CspTerm::Stop | CspTerm::Success | CspTerm::Var(_) => Vec::new(),
        // Rule Div.
        CspTerm::Div => vec![CspStep {
            label: CspLabel::Tau,
            target: CspTerm::Div,
            redex: BTreeSet::new(),
        }],
        // Rules Act and Ece.
        CspTerm::ExtSum(sums) => sums
            .iter()
            .map(|s| CspStep {
                label: CspLabel::Act(s.action),
                target: s.cont.clone(),
                redex: BTreeSet::from([s.occ]),
            })
            .collect(),
        // Rules Inc0 and Inc1.
        CspTerm::InternalChoice(l, r) => vec![
            CspStep {
                label: CspLabel::Tau,
                target: (**l).clone(),
                redex: BTreeSet::new(),
            },
            CspStep {
                label: CspLabel::Tau,
                target: (**r).clone(),
                redex: BTreeSet::new(),
            },
        ],
        // Rule Rec: one-level unfolding.
        CspTerm::Rec { var, body } => vec![CspStep {
            label: CspLabel::Tau,
            target: body.subst_var(var, p, gen),
            redex: BTreeSet::new(),
        }],
        // Rules Par0, Par1 and Par2.
        CspTerm::Parallel { left, right, sync } => {
            let ls = steps_inner(left, gen);
            let rs = steps_inner(right, gen);
            let mut out = Vec::new();
            for s in &ls {
                let synced = matches!(s.label, CspLabel::Act(a) if sync.contains(&a));
                if !synced {
                    out.push(CspStep {
                        label: s.label,
                        target: CspTerm::Parallel {
                            left: Box::new(s.target.clone()),
                            right: right.clone(),
                            sync: sync.clone(),
                        },
                        redex: s.redex.clone(),
                    });
                }
            }
            for s in &rs {
                let synced = matches!(s.label, CspLabel::Act(a) if sync.contains(&a));
                if !synced {
                    out.push(CspStep {
                        label: s.label,
                        target: CspTerm::Parallel {
                            left: left.clone(),
                            right: Box::new(s.target.clone()),
                            sync: sync.clone(),
                        },
                        redex: s.redex.clone(),
                    });
                }
            }
            for l in &ls {
                if let CspLabel::Act(a) = l.label {
                    if !sync.contains(&a) {
                        continue;
                    }
                    for r in &rs {
                        if r.label == CspLabel::Act(a) {
                            out.push(CspStep {
                                label: l.label,
                                target: CspTerm::Parallel {
                                    left: Box::new(l.target.clone()),
                                    right: Box::new(r.target.clone()),
                                    sync: sync.clone(),
                                },
                                redex: l.redex.union(&r.redex).copied().collect(),
                            });
                        }
                    }
                }
            }
            out
        }
        // Rules Con0 and Con1.
        CspTerm::Conceal { body, name } => steps_inner(body, gen)
            .into_iter()
            .map(|s| CspStep {
                label: if s.label == CspLabel::Act(*name) {
                    CspLabel::Tau
                } else {
                    s.label
                },
                target: CspTerm::Conceal {
                    body: Box::new(s.target),
                    name: *name,
                },
                redex: s.redex,
            })
            .collect(),
        // Rule Ren.
        CspTerm::Rename { body, map } => steps_inner(body, gen)
            .into_iter()
            .map(|s| CspStep {
                label: match s.label {
                    CspLabel::Act(a) => CspLabel::Act(apply_renaming(map, a)),
                    CspLabel::Tau => CspLabel::Tau,
                },
                target: CspTerm::Rename {
                    body: Box::new(s.target),
                    map: map.clone(),
                },
                redex: s.redex,
            })
            .collect(),
    }
}

pub(crate) fn apply_renaming(map: &[(Name, Name)], a: Name) -> Name {
    map.iter()
        .find(|(x, _)| *x == a)
        .map(|(_, z)| *z)
        .unwrap_or(a)
}

/// Rule Red: reductions erase labels.
pub fn reductions(p: &CspTerm) -> Vec<(CspTerm, BTreeSet<OccId>)> {
    labelled_steps(p)
        .into_iter()
        .map(|s| (s.target, s.redex))
        .collect()
}

/// The barbs of a term: names of immediately possible actions.
pub fn barbs(p: &CspTerm) -> BTreeSet<Name> {
    labelled_steps(p)
        .iter()
        .filter_map(|s| match s.label {
            CspLabel::Act(a) => Some(a),
            CspLabel::Tau => None,
        })
        .collect()
}

/// Immediate success: an unguarded success occurrence. Success counts as
/// unguarded when reachable through parallel composition, concealment and
/// renaming only; prefixes, internal choice and recursion guard it, matching
/// how the encodings place success relative to their prefix structure.
pub fn has_success(p: &CspTerm) -> bool {
    match p {
        CspTerm::Success => true,
        CspTerm::Parallel { left, right, .. } => has_success(left) || has_success(right),
        CspTerm::Conceal { body, .. } | CspTerm::Rename { body, .. } => has_success(body),
        _ => false,
    }
}

/// Two steps of the same term are in conflict iff they reduce a common
/// action prefix.
pub fn conflicts_csp(r1: &BTreeSet<OccId>, r2: &BTreeSet<OccId>) -> bool {
    !r1.is_disjoint(r2)
}

/// True if some external choice of `p` contributes prefixes to both
/// redexes: the two steps resolve the same sum even when their prefix
/// occurrences are disjoint.
pub fn same_sum(p: &CspTerm, r1: &BTreeSet<OccId>, r2: &BTreeSet<OccId>) -> bool {
    fn go(t: &CspTerm, r1: &BTreeSet<OccId>, r2: &BTreeSet<OccId>) -> bool {
        match t {
            CspTerm::ExtSum(sums) => {
                let occs: BTreeSet<OccId> = sums.iter().map(|s| s.occ).collect();
                let hit = !occs.is_disjoint(r1) && !occs.is_disjoint(r2);
                hit || sums.iter().any(|s| go(&s.cont, r1, r2))
            }
            CspTerm::Parallel { left, right, .. } => go(left, r1, r2) || go(right, r1, r2),
            CspTerm::InternalChoice(l, r) => go(l, r1, r2) || go(r, r1, r2),
            CspTerm::Conceal { body, .. }
            | CspTerm::Rename { body, .. }
            | CspTerm::Rec { body, .. } => go(body, r1, r2),
            _ => false,
        }
    }
    go(p, r1, r2)
}

/// Maximal decomposition into distributable components: parallel
/// compositions split recursively, everything else is a single component.
pub fn distributable_components(p: &CspTerm) -> Vec<CspTerm> {
    match p {
        CspTerm::Parallel { left, right, .. } => {
            let mut out = distributable_components(left);
            out.extend(distributable_components(right));
            out
        }
        other => vec![other.clone()],
    }
}

/// Action-prefix occurrences that are unguarded: reachable without passing
/// a prefix continuation, an internal-choice branch or a recursion body.
/// These are exactly the prefixes whose announcements are unguarded in the
/// translations.
pub fn unguarded_prefix_occs(p: &CspTerm) -> BTreeSet<OccId> {
    let mut out = BTreeSet::new();
    fn go(t: &CspTerm, out: &mut BTreeSet<OccId>) {
        match t {
            CspTerm::ExtSum(sums) => {
                for s in sums {
                    out.insert(s.occ);
                }
            }
            CspTerm::Parallel { left, right, .. } => {
                go(left, out);
                go(right, out);
            }
            CspTerm::Conceal { body, .. } | CspTerm::Rename { body, .. } => go(body, out),
            _ => {}
        }
    }
    go(p, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::parse_csp;

    fn t(s: &str) -> CspTerm {
        parse_csp(s).unwrap()
    }

    #[test]
    fn act_rule() {
        let steps = labelled_steps(&t("a -> STOP"));
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, CspLabel::Act(Name::source("a")));
        assert_eq!(steps[0].target, CspTerm::Stop);
        assert_eq!(steps[0].redex.len(), 1);
    }

    #[test]
    fn div_self_loop() {
        let steps = labelled_steps(&CspTerm::Div);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, CspLabel::Tau);
        assert_eq!(steps[0].target, CspTerm::Div);
        assert!(steps[0].redex.is_empty());
    }

    #[test]
    fn synchronised_par_blocks_lone_side() {
        let steps = labelled_steps(&t("(a -> STOP) [|{a}|] (b -> STOP)"));
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, CspLabel::Act(Name::source("b")));
        assert!(steps[0].target.same_term(&t("(a -> STOP) [|{a}|] STOP")));
    }

    #[test]
    fn synchronised_step_joins_redexes() {
        let steps = labelled_steps(&t("(a -> STOP) [|{a}|] (a -> STOP)"));
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].redex.len(), 2);
    }

    #[test]
    fn internal_choice_two_taus() {
        let p = t("a -> STOP |~| b -> STOP");
        let steps = labelled_steps(&p);
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|s| s.label == CspLabel::Tau));
    }

    #[test]
    fn concealment_converts_to_tau_and_keeps_redex() {
        let steps = labelled_steps(&t("(a -> STOP) \\ a"));
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, CspLabel::Tau);
        assert_eq!(steps[0].redex.len(), 1);
        assert!(steps[0].target.same_term(&t("STOP \\ a")));
    }

    #[test]
    fn renaming_applies_to_labels() {
        let steps = labelled_steps(&t("(a -> b -> STOP)[[a := b]]"));
        assert_eq!(steps[0].label, CspLabel::Act(Name::source("b")));
        // Identity outside the domain, and tau stays tau.
        let steps = labelled_steps(&t("(c -> STOP)[[a := b]]"));
        assert_eq!(steps[0].label, CspLabel::Act(Name::source("c")));
        let steps = labelled_steps(&t("(DIV)[[a := b]]"));
        assert_eq!(steps[0].label, CspLabel::Tau);
    }

    #[test]
    fn rec_unfolds_exactly_one_level() {
        let p = t("mu X . a -> X");
        let steps = labelled_steps(&p);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, CspLabel::Tau);
        assert!(steps[0].target.same_term(&t("a -> mu X . a -> X")));
        // Unfolding again from the continuation returns to the original.
        let inner = labelled_steps(&steps[0].target);
        assert!(inner[0].target.same_term(&p));
    }

    #[test]
    fn rec_substitution_avoids_capture() {
        // mu X . mu Y . X has the inner binder renamed when X's unfolding
        // would capture it.
        let p = CspTerm::Rec {
            var: "X".into(),
            body: Box::new(CspTerm::Rec {
                var: "Y".into(),
                body: Box::new(CspTerm::InternalChoice(
                    Box::new(CspTerm::Var("X".into())),
                    Box::new(CspTerm::Var("Y".into())),
                )),
            }),
        };
        let steps = labelled_steps(&p);
        assert_eq!(steps.len(), 1);
        // The unfolded body must still refer to the outer recursion.
        let unfolded = &steps[0].target;
        assert!(unfolded.free_vars().is_empty());
    }

    #[test]
    fn free_var_has_no_steps() {
        assert!(labelled_steps(&t("X")).is_empty());
        assert_eq!(labelled_steps(&t("a -> X")).len(), 1);
    }

    #[test]
    fn reductions_examples() {
        assert!(reductions(&CspTerm::Stop).is_empty());
        assert_eq!(reductions(&t("a -> STOP")).len(), 1);
        let e = t("(o -> STOP [] p -> STOP) [|{o,p}|] (o -> STOP [] p -> STOP [] q -> STOP)");
        assert_eq!(reductions(&e).len(), 3);
    }

    #[test]
    fn barbs_examples() {
        let got = barbs(&t("a -> STOP [] b -> STOP"));
        assert_eq!(got, BTreeSet::from([Name::source("a"), Name::source("b")]));
        assert!(barbs(&t("(a -> STOP) \\ a")).is_empty());
        assert!(barbs(&CspTerm::Stop).is_empty());
    }

    #[test]
    fn success_scan() {
        assert!(has_success(&CspTerm::Success));
        assert!(!has_success(&t("a -> SUCCESS")));
        // Success under the static operators stays unguarded...
        assert!(has_success(&t("SUCCESS [|{}|] STOP")));
        assert!(has_success(&t("SUCCESS \\ a")));
        assert!(has_success(&t("SUCCESS[[a := b]]")));
        // ...but internal choice and recursion guard it, mirroring the
        // translations, which guard both branches.
        assert!(!has_success(&t("SUCCESS |~| STOP")));
        assert!(!has_success(&t("mu X . SUCCESS")));
    }

    #[test]
    fn conflict_by_redex_intersection() {
        let e = t("(o -> STOP [] p -> STOP) [|{o,p}|] (o -> STOP [] p -> STOP [] q -> STOP)");
        let steps = labelled_steps(&e);
        assert_eq!(steps.len(), 3);
        let by_label = |n: &str| {
            steps
                .iter()
                .find(|s| s.label == CspLabel::Act(Name::source(n)))
                .unwrap()
        };
        let (o, p, q) = (by_label("o"), by_label("p"), by_label("q"));
        // o and p reduce disjoint prefix occurrences: not in conflict under
        // the literal definition, though they resolve the same sums.
        assert!(!conflicts_csp(&o.redex, &p.redex));
        assert!(same_sum(&e, &o.redex, &p.redex));
        assert!(same_sum(&e, &p.redex, &q.redex));
        assert!(conflicts_csp(&o.redex, &o.redex));

        let ind = t("(a -> STOP) [|{}|] (b -> STOP)");
        let steps = labelled_steps(&ind);
        assert!(!conflicts_csp(&steps[0].redex, &steps[1].redex));
        assert!(!same_sum(&ind, &steps[0].redex, &steps[1].redex));
    }

    #[test]
    fn components() {
        assert_eq!(distributable_components(&t("(a -> STOP) [|{}|] (b -> STOP)")).len(), 2);
        assert_eq!(distributable_components(&t("a -> b -> STOP")).len(), 1);
        assert_eq!(
            distributable_components(&t("((a -> STOP) [|{}|] (b -> STOP)) [|{}|] (c -> STOP)"))
                .len(),
            3
        );
    }

    #[test]
    fn unguarded_prefixes_views() {
        let p = t("a -> b -> STOP [|{}|] (c -> STOP |~| d -> STOP)");
        let unguarded = unguarded_prefix_occs(&p);
        // Only `a` is unguarded: `b` is behind `a`, `c`/`d` behind the choice.
        assert_eq!(unguarded.len(), 1);
    }
}
