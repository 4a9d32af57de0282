use cps_reliab_core::catalog::{
    assemble_architecture, build_architecture, read_catalog, CatalogEntry, ModuleChoices,
    RedundancyPlan,
};
use cps_reliab_core::{evaluate_cps, ComponentKind};
use proptest::prelude::*;

const HEADER: &str = "component_id,module_kind,model_type,p1,p2,p3,source\n";

const KINDS: [(&str, &str); 6] = [
    ("S", "sensor"),
    ("A", "actuator"),
    ("N", "network"),
    ("HW", "compute_hardware"),
    ("SW", "compute_software"),
    ("SH", "compute_interaction"),
];

/// The model columns of one row; `ties` draws from a small set of rates so
/// that equal reliabilities are common.
fn arb_params(software: bool, constant_only: bool) -> BoxedStrategy<String> {
    let constant = prop_oneof![
        (0.0..60.0f64).prop_map(|r| format!("constant,{r},,")),
        prop::sample::select(vec![2.0, 5.0, 10.0]).prop_map(|r| format!("constant,{r},,")),
    ];
    if constant_only {
        return constant.boxed();
    }
    let third = if software {
        (1.0..40.0f64, 1e-4..1e-2f64, 0.0..5000.0f64)
            .prop_map(|(a, b, t)| format!("srgm,{a},{b},{t}"))
            .boxed()
    } else {
        (1e-9..1e-5f64, 0.5..2.5f64, prop::option::of(0.0..5000.0f64))
            .prop_map(|(s, k, age)| {
                format!(
                    "powerlaw,{s},{k},{}",
                    age.map_or(String::new(), |a| a.to_string())
                )
            })
            .boxed()
    };
    prop_oneof![constant, third].boxed()
}

fn arb_catalog(constant_only: bool) -> impl Strategy<Value = Vec<String>> {
    KINDS
        .iter()
        .enumerate()
        .map(|(i, &(prefix, kind))| {
            let min = if i < 4 { 1 } else { 0 };
            prop::collection::vec(arb_params(prefix == "SW", constant_only), min..4).prop_map(
                move |ps| {
                    ps.into_iter()
                        .enumerate()
                        .map(|(j, p)| format!("{prefix}{j},{kind},{p},src"))
                        .collect::<Vec<_>>()
                },
            )
        })
        .collect::<Vec<_>>()
        .prop_map(|groups| groups.concat())
}

fn parse(rows: &[String]) -> Vec<CatalogEntry> {
    read_catalog(format!("{HEADER}{}\n", rows.join("\n")).as_bytes()).unwrap()
}

fn chosen_ids(catalog: &[CatalogEntry], mission: f64) -> Vec<String> {
    let (_, report) = assemble_architecture(catalog, mission, &RedundancyPlan::default()).unwrap();
    report
        .modules
        .iter()
        .map(|m| m.chosen().entry.component_id.clone())
        .collect()
}

fn rate(e: &CatalogEntry) -> f64 {
    match e.model {
        cps_reliab_core::FailureModel::ConstantRate { lambda, .. } => lambda,
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn choice_is_the_most_reliable(rows in arb_catalog(false), mission in 0.0..50_000.0f64) {
        let catalog = parse(&rows);
        let (_, report) = assemble_architecture(&catalog, mission, &RedundancyPlan::default()).unwrap();
        for m in &report.modules {
            let best = catalog
                .iter()
                .filter(|e| e.module_kind == m.kind)
                .map(|e| e.reliability(mission).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(m.chosen().reliability, best);
            prop_assert!(m.ranked.windows(2).all(|w| w[0].reliability >= w[1].reliability));
        }
    }

    #[test]
    fn constant_rate_choice_is_min_rate(rows in arb_catalog(true), m1 in 1.0..50_000.0f64, m2 in 1.0..50_000.0f64) {
        let catalog = parse(&rows);
        let ids = chosen_ids(&catalog, m1);
        prop_assert_eq!(&ids, &chosen_ids(&catalog, m2));
        for id in &ids {
            let e = catalog.iter().find(|e| &e.component_id == id).unwrap();
            let min = catalog
                .iter()
                .filter(|x| x.module_kind == e.module_kind)
                .map(rate)
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(rate(e), min);
        }
    }

    #[test]
    fn permuted_catalog_same_choices(
        (rows, shuffled) in arb_catalog(false).prop_flat_map(|r| (Just(r.clone()), Just(r).prop_shuffle())),
        mission in 0.0..50_000.0f64,
    ) {
        let a = parse(&rows);
        let b = parse(&shuffled);
        prop_assert_eq!(chosen_ids(&a, mission), chosen_ids(&b, mission));
        let ra = assemble_architecture(&a, mission, &RedundancyPlan::default()).unwrap().1.r_cps();
        let rb = assemble_architecture(&b, mission, &RedundancyPlan::default()).unwrap().1.r_cps();
        prop_assert_eq!(ra, rb);
    }

    #[test]
    fn swapping_in_a_runner_up_never_helps(rows in arb_catalog(false), mission in 0.0..50_000.0f64) {
        let catalog = parse(&rows);
        let plan = RedundancyPlan::default();
        let (_, report) = assemble_architecture(&catalog, mission, &plan).unwrap();
        let best = report.r_cps();
        let pick = |k: ComponentKind| report.modules.iter().find(|m| m.kind == k).map(|m| m.chosen().entry.clone());
        let base = ModuleChoices {
            sensor: pick(ComponentKind::Sensor).unwrap(),
            actuator: pick(ComponentKind::Actuator).unwrap(),
            network: pick(ComponentKind::Network).unwrap(),
            cc_hardware: pick(ComponentKind::ComputeHardware).unwrap(),
            cc_software: pick(ComponentKind::ComputeSoftware),
            cc_interaction: pick(ComponentKind::ComputeInteraction),
        };
        for e in &catalog {
            let mut c = base.clone();
            match e.module_kind {
                ComponentKind::Sensor => c.sensor = e.clone(),
                ComponentKind::Actuator => c.actuator = e.clone(),
                ComponentKind::Network => c.network = e.clone(),
                ComponentKind::ComputeHardware => c.cc_hardware = e.clone(),
                ComponentKind::ComputeSoftware => c.cc_software = Some(e.clone()),
                ComponentKind::ComputeInteraction => c.cc_interaction = Some(e.clone()),
                _ => unreachable!(),
            }
            let arch = build_architecture(&c, mission, &plan).unwrap();
            let r = evaluate_cps(&arch, mission, false).unwrap().system;
            prop_assert!(r <= best, "swapping in {} gives {r} > {best}", e.component_id);
        }
    }
}
