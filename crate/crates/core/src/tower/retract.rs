//! Big-power retractions and verified discrimination searches.
//!
//! A tower with top CE step `(u, t, ρ)` retracts onto its lower tower by
//! fixing the lower generators and sending `t ↦ ρᵏ` (legal for every k:
//! ρ lies in the abelian centralizer being extended). For any finite set X
//! some composite of such retractions is injective on X — but no effective
//! bound on the exponents is available, so the search doubles k per level
//! and verifies injectivity by equality tests before returning. A returned
//! hom is never wrong; cap exhaustion is reported as a search failure
//! carrying the attempted exponents.

use super::{fpce_normalize, Hom, Tower, TowerStep};
use crate::error::{Error, Result};
use crate::word::{Gen, ShortlexWords, Word};

/// Default per-level exponent cap for the doubling search.
pub const DEFAULT_EXP_CAP: i64 = 1024;

/// Default total attempt budget for free-letter substitution search.
pub const DEFAULT_SUBST_CAP: u64 = 20_000;

/// Retraction of the top CE step: fixes the lower tower, maps `t ↦ ρᵏ`.
pub fn level_retraction(t: &Tower, k: i64) -> Result<Hom> {
    if k == 0 {
        return Err(Error::Domain(
            "level retraction requires a nonzero exponent".into(),
        ));
    }
    let Some(top) = t.steps().last() else {
        return Err(Error::Domain("the base free group has no step to retract".into()));
    };
    let TowerStep::Ce { letter, core, .. } = top else {
        return Err(Error::Domain(
            "top step is a free factor; level retractions apply to CE steps only \
             (use discriminate_to_free)"
                .into(),
        ));
    };
    let target = t.prefix(t.depth() - 1);
    let mut images: Vec<Word> = (0..*letter).map(Word::generator).collect();
    images.push(core.pow(k));
    Ok(Hom::unchecked(t.clone(), target, images))
}

/// Composite of level retractions over the top `levels` steps (all CE) whose
/// restriction to X is injective and maps nontrivial elements to nontrivial
/// ones. Exponents are searched per level by doubling from 1 up to `cap`,
/// and every candidate is verified by equality tests in its target.
pub fn discriminating_hom(t: &Tower, xs: &[Word], levels: usize) -> Result<Hom> {
    discriminating_hom_with_cap(t, xs, levels, DEFAULT_EXP_CAP)
}

pub fn discriminating_hom_with_cap(
    t: &Tower,
    xs: &[Word],
    levels: usize,
    cap: i64,
) -> Result<Hom> {
    if levels > t.depth() {
        return Err(Error::Domain(format!(
            "cannot retract {levels} levels from a depth-{} tower",
            t.depth()
        )));
    }
    for h in (t.depth() - levels..t.depth()).rev() {
        if !t.steps()[h].is_ce() {
            return Err(Error::Domain(
                "discriminating_hom needs CE steps on top; normalize free factors first".into(),
            ));
        }
    }
    // Working set: X plus the identity (so discrimination also preserves
    // nontriviality), deduplicated under tower equality.
    let mut set: Vec<Word> = vec![Word::identity()];
    for x in xs {
        if !set.iter().any(|y| t.equals(x, y)) {
            set.push(t.reduce(x));
        }
    }
    let mut composite = Hom::identity(t);
    let mut cur = t.clone();
    let mut attempted: Vec<(String, i64)> = Vec::new();
    for _ in 0..levels {
        let TowerStep::Ce { letter, .. } = cur.steps().last().expect("checked CE above") else {
            unreachable!()
        };
        let letter_name = cur.alphabet().name(*letter).to_string();
        let mut k = 1i64;
        let mut found = None;
        while k <= cap {
            let h = level_retraction(&cur, k)?;
            let images: Vec<Word> = set.iter().map(|x| h.apply(x)).collect();
            let tgt = h.target().clone();
            let injective = (0..images.len()).all(|i| {
                (i + 1..images.len()).all(|j| !tgt.equals(&images[i], &images[j]))
            });
            attempted.push((letter_name.clone(), k));
            if injective {
                found = Some((h, images));
                break;
            }
            k = k.saturating_mul(2);
        }
        let Some((h, images)) = found else {
            return Err(Error::Search {
                what: format!("discriminating exponent for level letter {letter_name}"),
                cap: cap as u64,
                attempted,
            });
        };
        cur = h.target().clone();
        composite = Hom::compose(&h, &composite)?;
        set = images;
    }
    // Contract: never return an unverified hom. Re-check injectivity of the
    // composite on the original X.
    let target = composite.target().clone();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if !t.equals(&xs[i], &xs[j]) {
                let a = composite.apply(&xs[i]);
                let b = composite.apply(&xs[j]);
                assert!(
                    !target.equals(&a, &b),
                    "per-level verification implies composite injectivity"
                );
            }
        }
    }
    Ok(composite)
}

/// Hom onto the base free group, injective on X: FP letters are merged into
/// the base by normalization and then substituted by shortlex-enumerated
/// words over the original base (verified, capped); CE letters are peeled by
/// the discriminating exponent search.
pub fn discriminate_to_free(t: &Tower, xs: &[Word]) -> Result<Hom> {
    discriminate_to_free_with_caps(t, xs, DEFAULT_EXP_CAP, DEFAULT_SUBST_CAP)
}

pub fn discriminate_to_free_with_caps(
    t: &Tower,
    xs: &[Word],
    exp_cap: i64,
    subst_cap: u64,
) -> Result<Hom> {
    let (norm, map) = fpce_normalize(t);
    let relabel_hom = Hom::unchecked(
        t.clone(),
        norm.clone(),
        (0..t.letter_count())
            .map(|g| Word::generator(map[g]))
            .collect(),
    );
    let xs1: Vec<Word> = xs.iter().map(|x| relabel_hom.apply(x)).collect();
    let peel = discriminating_hom_with_cap(&norm, &xs1, norm.depth(), exp_cap)?;
    let to_enlarged_base = Hom::compose(&peel, &relabel_hom)?;
    let enlarged = to_enlarged_base.target().clone();
    let orig_rank = t.base_rank();
    let extras = enlarged.base_rank() - orig_rank;
    if extras == 0 {
        return Ok(to_enlarged_base);
    }

    // Substitute the merged FP letters by base words, smallest shells first.
    let target = t.prefix(0);
    let xs2: Vec<Word> = xs.iter().map(|x| to_enlarged_base.apply(x)).collect();
    let mut set: Vec<Word> = vec![Word::identity()];
    for x in &xs2 {
        if !set.contains(x) {
            set.push(x.clone());
        }
    }
    let mut words: Vec<Word> = Vec::new();
    let mut gen = ShortlexWords::new(orig_rank as u32, None);
    let mut attempts: u64 = 0;
    let extra_names: Vec<String> = (orig_rank..enlarged.base_rank())
        .map(|g| enlarged.alphabet().name(g as Gen).to_string())
        .collect();
    for shell in 0usize.. {
        while words.len() <= shell {
            match gen.next() {
                Some(w) => words.push(w),
                None => {
                    return Err(Error::Search {
                        what: format!(
                            "free substitution for letters {:?} (base enumeration exhausted)",
                            extra_names
                        ),
                        cap: subst_cap,
                        attempted: vec![(extra_names[0].clone(), shell as i64)],
                    })
                }
            }
        }
        // All index tuples with maximum exactly `shell`.
        let mut idx = vec![0usize; extras];
        loop {
            if idx.iter().copied().max() == Some(shell) {
                attempts += 1;
                if attempts > subst_cap {
                    return Err(Error::Search {
                        what: format!("free substitution for letters {:?}", extra_names),
                        cap: subst_cap,
                        attempted: extra_names
                            .iter()
                            .map(|n| (n.clone(), shell as i64))
                            .collect(),
                    });
                }
                let mut images: Vec<Word> =
                    (0..orig_rank as Gen).map(Word::generator).collect();
                for &i in &idx {
                    images.push(words[i].clone());
                }
                let h = Hom::unchecked(enlarged.clone(), target.clone(), images);
                let injective = {
                    let imgs: Vec<Word> = set.iter().map(|x| h.apply(x)).collect();
                    (0..imgs.len())
                        .all(|i| (i + 1..imgs.len()).all(|j| imgs[i] != imgs[j]))
                };
                if injective {
                    return Hom::compose(&h, &to_enlarged_base);
                }
            }
            // Advance the mixed-radix tuple over [0, shell] with carries;
            // a full wrap ends the shell.
            let mut advanced = false;
            let mut pos = extras;
            while pos > 0 {
                pos -= 1;
                if idx[pos] < shell {
                    idx[pos] += 1;
                    for v in idx.iter_mut().skip(pos + 1) {
                        *v = 0;
                    }
                    advanced = true;
                    break;
                }
                idx[pos] = 0;
            }
            if !advanced {
                break;
            }
        }
    }
    unreachable!("the shell loop exits only by return")
}

#[cfg(test)]
mod tests {
    use super::super::tests::f_ab_with_ce;
    use super::*;
    use crate::word::Alphabet;

    #[test]
    fn level_retraction_examples() {
        let (t, _) = f_ab_with_ce();
        let h = level_retraction(&t, 5).unwrap();
        let x = t.parse("t^-1 b t").unwrap();
        let img = h.apply(&x);
        assert_eq!(h.target().print(&img), "a^-5 b a^5");
        // k = 1 is legal.
        assert!(level_retraction(&t, 1).is_ok());
        // k = 0 is not.
        assert!(matches!(level_retraction(&t, 0), Err(Error::Domain(_))));
        // FP top step is not retractable.
        let fp = t.free_product(&["c"]).unwrap();
        assert!(matches!(level_retraction(&fp, 2), Err(Error::Domain(_))));
        // Base tower has nothing to retract.
        assert!(level_retraction(&t.prefix(0), 1).is_err());
    }

    #[test]
    fn retraction_composition_is_functorial() {
        // Depth-2 tower: retract twice, check apply∘reduce = reduce∘apply.
        let base = Tower::make(2).unwrap();
        let a = base.parse("a").unwrap();
        let t1 = base.extend_centralizer(&a, "t1").unwrap();
        let t1w = t1.parse("t1").unwrap();
        let t2 = t1.extend_centralizer(&t1w, "t2").unwrap();
        let h_top = level_retraction(&t2, 3).unwrap();
        let h_bot = level_retraction(&t1, 2).unwrap();
        let h = Hom::compose(&h_bot, &h_top).unwrap();
        let samples = [
            "t2^-1 a t2",
            "t2 t1 a",
            "b t2 b^-1 t1^-1",
            "t1^-1 b t1 t2^2",
            "a^2 t2^-2 b",
        ];
        for s in samples {
            let w = t2.parse(s).unwrap();
            let via_reduce = h.apply(&t2.reduce(&w));
            let direct = h.apply(&w);
            assert!(h.target().equals(&via_reduce, &direct), "{s}");
        }
        // Exponent bookkeeping: t2 ↦ t1^3 ↦ a^6.
        let img = h.apply(&t2.parse("t2").unwrap());
        assert_eq!(h.target().print(&img), "a^6");
    }

    #[test]
    fn discriminating_hom_examples() {
        let (t, _) = f_ab_with_ce();
        // Conjugates of b by powers of t: k = 1 already injective.
        let xs: Vec<Word> = ["b", "t^-1 b t", "t^-2 b t^2"]
            .iter()
            .map(|s| t.parse(s).unwrap())
            .collect();
        let h = discriminating_hom(&t, &xs, 1).unwrap();
        assert_eq!(h.target().print(&h.apply(&t.parse("t").unwrap())), "a");
        let imgs: Vec<String> = xs.iter().map(|x| h.target().print(&h.apply(x))).collect();
        assert_eq!(imgs, vec!["b", "a^-1 b a", "a^-2 b a^2"]);

        // The singleton {1} is discriminated by any retraction.
        let h = discriminating_hom(&t, &[Word::identity()], 1).unwrap();
        assert_eq!(h.target().depth(), 0);

        // {t, a}: k = 1 collides (t ↦ a), k = 2 succeeds.
        let xs = vec![t.parse("t").unwrap(), t.parse("a").unwrap()];
        let h = discriminating_hom(&t, &xs, 1).unwrap();
        assert_eq!(h.target().print(&h.apply(&t.parse("t").unwrap())), "a^2");
    }

    #[test]
    fn discriminating_hom_cap_exhaustion() {
        let (t, _) = f_ab_with_ce();
        let xs = vec![t.parse("t").unwrap(), t.parse("a").unwrap()];
        let err = discriminating_hom_with_cap(&t, &xs, 1, 1).unwrap_err();
        match err {
            Error::Search { cap, attempted, .. } => {
                assert_eq!(cap, 1);
                assert_eq!(attempted, vec![("t".to_string(), 1)]);
            }
            other => panic!("expected a search failure, got {other:?}"),
        }
    }

    #[test]
    fn discriminate_to_free_depth_zero_is_identity() {
        let t = Tower::make(2).unwrap();
        let xs = vec![t.parse("a b").unwrap()];
        let h = discriminate_to_free(&t, &xs).unwrap();
        assert_eq!(h.apply(&xs[0]), xs[0]);
    }

    #[test]
    fn discriminate_to_free_single_ce() {
        let (t, _) = f_ab_with_ce();
        let x = t.parse("t^-1 b t b").unwrap();
        let h = discriminate_to_free(&t, std::slice::from_ref(&x)).unwrap();
        // Smallest verified exponent is 1: t ↦ a, image a^-1 b a b ≠ 1.
        assert_eq!(h.target().print(&h.apply(&t.parse("t").unwrap())), "a");
        assert!(!h.target().is_trivial(&h.apply(&x)));
    }

    #[test]
    fn discriminate_to_free_substitutes_fp_letters() {
        // F(a,b) ∗ F(c): c must land on a base word keeping [c,a] nontrivial.
        let t = Tower::make(2).unwrap().free_product(&["c"]).unwrap();
        let x = t.parse("c a c^-1 a^-1").unwrap();
        let h = discriminate_to_free(&t, std::slice::from_ref(&x)).unwrap();
        let img = h.apply(&x);
        assert!(!h.target().is_trivial(&img));
        // c's image is the shortlex-least base word that works: b.
        let c = t.parse("c").unwrap();
        assert_eq!(h.target().print(&h.apply(&c)), "b");
    }

    #[test]
    fn discriminate_to_free_rank_one_limitation() {
        // F(a) ∗ F(c): every substitution c ↦ a^j kills [c, a]; the search
        // must fail rather than return an unsound hom.
        let t = Tower::from_base(Alphabet::new(["a"]).unwrap())
            .free_product(&["c"])
            .unwrap();
        let x = t.parse("c a c^-1 a^-1").unwrap();
        let err = discriminate_to_free_with_caps(&t, &[x], DEFAULT_EXP_CAP, 50).unwrap_err();
        assert!(matches!(err, Error::Search { .. }));
    }

    #[test]
    fn discriminate_mixed_tower() {
        // FP letters below a CE step: normalize, peel, substitute.
        let base = Tower::make(2).unwrap();
        let a = base.parse("a").unwrap();
        let t = base
            .extend_centralizer(&a, "t")
            .unwrap()
            .free_product(&["c"])
            .unwrap();
        let xs: Vec<Word> = ["t^-1 b t", "c a c^-1", "b c"]
            .iter()
            .map(|s| t.parse(s).unwrap())
            .collect();
        let h = discriminate_to_free(&t, &xs).unwrap();
        let tgt = h.target().clone();
        assert_eq!(tgt.depth(), 0);
        assert_eq!(tgt.base_rank(), 2);
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                assert!(!tgt.equals(&h.apply(&xs[i]), &h.apply(&xs[j])));
            }
        }
    }
}
