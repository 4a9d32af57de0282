mod common;

use common::{arb_architecture, arb_block, leaf_values, MISSION};
use cps_reliab_core::{
    evaluate_block, evaluate_cps, k_of_n_reliability, parallel_reliability, series_reliability,
    Block, CombinerMode, FailureModel,
};
use proptest::prelude::*;

fn brute_force(k: usize, p: &[f64]) -> f64 {
    let n = p.len();
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize >= k)
        .map(|mask| {
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] })
                .product::<f64>()
        })
        .sum()
}

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![0.0..=1.0f64, Just(0.0), Just(1.0), 0.999..1.0f64]
}

/// Same model family with every hazard scaled by `f` in [0, 1].
fn more_reliable(m: &FailureModel, f: f64) -> FailureModel {
    match *m {
        FailureModel::ConstantRate { lambda, .. } => {
            FailureModel::constant_rate(lambda * f).unwrap()
        }
        FailureModel::PowerLaw { scale, shape, .. } => {
            FailureModel::power_law(scale * f, shape).unwrap()
        }
        FailureModel::SrgmNhpp { a, b, t_test, .. } => {
            FailureModel::srgm((a * f).max(1e-300), b, t_test).unwrap()
        }
    }
}

fn map_leaf(
    block: &Block,
    target: usize,
    f: &mut impl FnMut(&Block) -> Block,
    seen: &mut usize,
) -> Block {
    match block {
        Block::Leaf(_) => {
            *seen += 1;
            if *seen - 1 == target {
                f(block)
            } else {
                block.clone()
            }
        }
        Block::Series(ch) => {
            Block::Series(ch.iter().map(|b| map_leaf(b, target, f, seen)).collect())
        }
        Block::Parallel(ch) => {
            Block::Parallel(ch.iter().map(|b| map_leaf(b, target, f, seen)).collect())
        }
        Block::KofN { k, children } => Block::KofN {
            k: *k,
            children: children
                .iter()
                .map(|b| map_leaf(b, target, f, seen))
                .collect(),
        },
    }
}

fn has_k_of_n(block: &Block) -> bool {
    match block {
        Block::Leaf(_) => false,
        Block::KofN { k, .. } if *k > 1 => true,
        Block::Series(ch) | Block::Parallel(ch) | Block::KofN { children: ch, .. } => {
            ch.iter().any(has_k_of_n)
        }
    }
}

/// Depth-first indices of leaves with no k-of-n (k > 1) ancestor.
fn redundancy_sites(block: &Block, under_k: bool, next: &mut usize, out: &mut Vec<usize>) {
    match block {
        Block::Leaf(_) => {
            if !under_k {
                out.push(*next);
            }
            *next += 1;
        }
        Block::KofN { k, children } => children
            .iter()
            .for_each(|b| redundancy_sites(b, under_k || *k > 1, next, out)),
        Block::Series(ch) | Block::Parallel(ch) => ch
            .iter()
            .for_each(|b| redundancy_sites(b, under_k, next, out)),
    }
}

fn reversed(block: &Block) -> Block {
    match block {
        Block::Leaf(_) => block.clone(),
        Block::Series(ch) => Block::Series(ch.iter().rev().map(reversed).collect()),
        Block::Parallel(ch) => Block::Parallel(ch.iter().rev().map(reversed).collect()),
        Block::KofN { k, children } => Block::KofN {
            k: *k,
            children: children.iter().map(reversed).collect(),
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn series_parallel_bounds(p in prop::collection::vec(unit(), 1..12)) {
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s = series_reliability(&p).unwrap();
        let par = parallel_reliability(&p).unwrap();
        prop_assert!((0.0..=lo).contains(&s));
        prop_assert!((hi..=1.0).contains(&par));
    }

    #[test]
    fn k_of_n_non_increasing_in_k(p in prop::collection::vec(unit(), 1..16)) {
        let r: Vec<f64> = (1..=p.len()).map(|k| k_of_n_reliability(k, &p).unwrap()).collect();
        for w in r.windows(2) {
            prop_assert!(w[1] <= w[0], "{:?}", r);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn k_of_n_matches_enumeration(p in prop::collection::vec(unit(), 1..=12), seed in any::<usize>()) {
        let k = 1 + seed % p.len();
        let dp = k_of_n_reliability(k, &p).unwrap();
        let bf = brute_force(k, &p);
        prop_assert!((dp - bf).abs() <= 1e-12, "k={k} dp={dp} bf={bf}");
    }

    #[test]
    fn k_of_n_extremes(p in prop::collection::vec(unit(), 1..12)) {
        let n = p.len();
        prop_assert!((k_of_n_reliability(1, &p).unwrap() - parallel_reliability(&p).unwrap()).abs() <= 1e-15);
        prop_assert!((k_of_n_reliability(n, &p).unwrap() - series_reliability(&p).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn block_value_is_probability(b in arb_block(), mission in 0.0..1e5f64) {
        let r = evaluate_block(&b, mission).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn improving_a_leaf_never_hurts(b in arb_block(), pick in any::<usize>(), f in 0.0..=1.0f64) {
        let target = pick % b.leaves().len();
        let better = map_leaf(&b, target, &mut |leaf| match leaf {
            Block::Leaf(c) => {
                let mut c = c.clone();
                c.model = more_reliable(&c.model, f);
                Block::Leaf(c)
            }
            _ => unreachable!(),
        }, &mut 0);
        let before = evaluate_block(&b, MISSION).unwrap();
        let after = evaluate_block(&better, MISSION).unwrap();
        // k-of-n sums rounded state probabilities, so it may wobble by an ulp
        let tol = if has_k_of_n(&b) { 4.0 * f64::EPSILON } else { 0.0 };
        prop_assert!(after >= before - tol, "{before} -> {after}");
    }

    #[test]
    fn redundant_copy_never_hurts(b in arb_block(), pick in any::<usize>(), mission in 0.0..1e5f64) {
        let mut sites = Vec::new();
        redundancy_sites(&b, false, &mut 0, &mut sites);
        prop_assume!(!sites.is_empty());
        let target = sites[pick % sites.len()];
        let grown = map_leaf(&b, target, &mut |leaf| match leaf {
            Block::Leaf(c) => {
                let mut copy = c.clone();
                copy.id = format!("{}-spare", c.id);
                Block::Parallel(vec![leaf.clone(), Block::Leaf(copy)])
            }
            _ => unreachable!(),
        }, &mut 0);
        grown.validate().unwrap();
        let before = evaluate_block(&b, mission).unwrap();
        let after = evaluate_block(&grown, mission).unwrap();
        prop_assert!(after >= before, "{before} -> {after}");
    }

    #[test]
    fn child_order_is_irrelevant(arch in arb_architecture()) {
        let mut rev = arch.clone();
        rev.sensors = reversed(&arch.sensors);
        rev.actuators = reversed(&arch.actuators);
        rev.network = reversed(&arch.network);
        rev.cc_hardware = reversed(&arch.cc_hardware);
        rev.cc_software = arch.cc_software.as_ref().map(reversed);
        rev.cc_interaction = arch.cc_interaction.as_ref().map(reversed);
        let a = evaluate_cps(&arch, arch.mission, false).unwrap().headline();
        let b = evaluate_cps(&rev, rev.mission, false).unwrap().headline();
        prop_assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
    }

    #[test]
    fn system_value_is_probability(arch in arb_architecture()) {
        let b = evaluate_cps(&arch, arch.mission, false).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.system));
        prop_assert!((0.0..=1.0).contains(&b.cc.value));
        prop_assert!(!b.cc.exceeds_unity);
    }

    #[test]
    fn data_term_factorizes(mut arch in arb_architecture(), d in 0.0..=1.0f64) {
        arch.data_reliability = None;
        let without = evaluate_cps(&arch, arch.mission, false).unwrap().headline();
        arch.data_reliability = Some(d);
        let with = evaluate_cps(&arch, arch.mission, false).unwrap().headline();
        prop_assert!((with - without * d).abs() <= 1e-15);
    }

    #[test]
    fn normalized_mean_lies_between_parts(p in prop::collection::vec(0.0..=1.0f64, 1..6)) {
        let v = cps_reliab_core::composition::combine(&p, &CombinerMode::NormalizedMean { weights: None }).unwrap();
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= v.value && v.value <= hi);
    }

    #[test]
    fn series_of_leaves_is_product(b in arb_block()) {
        let leaves: Vec<Block> = b.leaves().into_iter().cloned().map(Block::Leaf).collect();
        let s = evaluate_block(&Block::Series(leaves), MISSION).unwrap();
        let p: f64 = leaf_values(&b, MISSION).iter().product();
        prop_assert!((s - p).abs() <= 1e-15);
    }
}
