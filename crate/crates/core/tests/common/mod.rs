#![allow(dead_code)]

use cps_reliab_core::{
    Block, CombinerMode, Component, ComponentKind, CpsArchitecture, FailureModel, Window,
};
use proptest::prelude::*;

pub const MISSION: f64 = 1000.0;

/// Any valid model, with parameters spanning several decades.
pub fn arb_model() -> impl Strategy<Value = FailureModel> {
    prop_oneof![
        (0.0..1e-3f64).prop_map(|l| FailureModel::constant_rate(l).unwrap()),
        (1e-9..1e-4f64, 0.3..3.0f64).prop_map(|(s, k)| FailureModel::power_law(s, k).unwrap()),
        (0.1..100.0f64, 1e-5..1e-2f64, 0.0..5000.0f64)
            .prop_map(|(a, b, t)| FailureModel::srgm(a, b, t).unwrap()),
    ]
}

/// A model whose reliability over `[0, MISSION]` equals `r`, drawn from
/// any of the three families.
pub fn model_with_reliability(r: f64, family: u8, shape: f64, b: f64, t_test: f64) -> FailureModel {
    let h = -r.ln();
    match family % 3 {
        0 => FailureModel::constant_rate(h / MISSION).unwrap(),
        1 => FailureModel::power_law(h / MISSION.powf(shape), shape).unwrap(),
        _ => {
            let a = h / ((-b * t_test).exp() * -(-b * MISSION).exp_m1());
            FailureModel::srgm(a, b, t_test).unwrap()
        }
    }
}

/// Mixed-family model with a moderate reliability at `MISSION`.
pub fn arb_moderate_model() -> impl Strategy<Value = FailureModel> {
    (
        0.5..0.99f64,
        any::<u8>(),
        0.5..2.5f64,
        1e-4..1e-3f64,
        0.0..3000.0f64,
    )
        .prop_map(|(r, f, k, b, t)| model_with_reliability(r, f, k, b, t))
}

fn placeholder(model: FailureModel) -> Block {
    Block::Leaf(Component::new("_", ComponentKind::Sensor, model, Window::FreshStart).unwrap())
}

/// Random series/parallel/k-of-n tree over leaves from `leaf`, with unique
/// ids `c0, c1, ...` in depth-first order.
pub fn arb_block_with(
    leaf: impl Strategy<Value = FailureModel> + 'static,
    depth: u32,
    max_leaves: u32,
) -> impl Strategy<Value = Block> {
    let leaf = leaf.prop_map(placeholder);
    leaf.prop_recursive(depth, max_leaves, 5, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..5).prop_map(Block::Series),
            prop::collection::vec(inner.clone(), 1..5).prop_map(Block::Parallel),
            (prop::collection::vec(inner, 1..5), any::<usize>()).prop_map(|(children, seed)| {
                Block::KofN {
                    k: 1 + seed % children.len(),
                    children,
                }
            }),
        ]
    })
    .prop_map(|b| relabel(b, "c"))
}

pub fn arb_block() -> impl Strategy<Value = Block> {
    arb_block_with(arb_model(), 4, 20)
}

pub fn relabel(mut block: Block, prefix: &str) -> Block {
    let mut next = 0;
    relabel_into(&mut block, prefix, &mut next);
    block
}

fn relabel_into(block: &mut Block, prefix: &str, next: &mut usize) {
    match block {
        Block::Leaf(c) => {
            c.id = format!("{prefix}{next}");
            c.name = c.id.clone();
            *next += 1;
        }
        Block::Series(ch) | Block::Parallel(ch) | Block::KofN { children: ch, .. } => {
            ch.iter_mut().for_each(|b| relabel_into(b, prefix, next))
        }
    }
}

pub fn arb_architecture() -> impl Strategy<Value = CpsArchitecture> {
    let small = || arb_block_with(arb_model(), 2, 6);
    (
        (small(), small(), small()),
        (
            prop::option::of(small()),
            small(),
            prop::option::of(small()),
        ),
        prop_oneof![
            Just(CombinerMode::Product),
            Just(CombinerMode::NormalizedMean { weights: None }),
            Just(CombinerMode::NormalizedMean {
                weights: Some(vec![0.2, 0.5, 0.3])
            }),
        ],
        0.0..20_000.0f64,
        prop::option::of(0.0..=1.0f64),
    )
        .prop_map(|((s, a, n), (sw, hw, sh), cc_mode, mission, data)| {
            // ids must be unique across the whole architecture
            let sw = sw.map(|b| retag(relabel(b, "sw"), ComponentKind::ComputeSoftware));
            CpsArchitecture {
                sensors: relabel(s, "s"),
                actuators: retag(relabel(a, "a"), ComponentKind::Actuator),
                network: retag(relabel(n, "n"), ComponentKind::Network),
                cc_software: sw,
                cc_hardware: retag(relabel(hw, "hw"), ComponentKind::ComputeHardware),
                cc_interaction: sh
                    .map(|b| retag(relabel(b, "sh"), ComponentKind::ComputeInteraction)),
                cc_mode,
                mission,
                data_reliability: data,
            }
        })
}

/// Sets every leaf's kind. Software leaves cannot use the power-law model,
/// so those are swapped for a constant rate of the same scale.
fn retag(mut block: Block, kind: ComponentKind) -> Block {
    fn walk(b: &mut Block, kind: ComponentKind) {
        match b {
            Block::Leaf(c) => {
                c.kind = kind;
                if kind == ComponentKind::ComputeSoftware {
                    if let FailureModel::PowerLaw { scale, .. } = c.model {
                        c.model = FailureModel::constant_rate(scale).unwrap();
                    }
                }
            }
            Block::Series(ch) | Block::Parallel(ch) | Block::KofN { children: ch, .. } => {
                ch.iter_mut().for_each(|x| walk(x, kind))
            }
        }
    }
    walk(&mut block, kind);
    block
}

/// Reliability of every leaf in depth-first order.
pub fn leaf_values(block: &Block, mission: f64) -> Vec<f64> {
    block
        .leaves()
        .iter()
        .map(|c| c.reliability(mission).unwrap())
        .collect()
}
