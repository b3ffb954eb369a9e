use proptest::prelude::*;

use magnon_cli::config::{AxisConfig, ComputeConfig, Format, OutputConfig, Params};
use magnon_cli::{parse_config_str, RunConfig, Subcommand};
use magnon_core::experiments::Channel;

fn subcommand() -> impl Strategy<Value = Subcommand> {
    prop_oneof![
        Just(Subcommand::SteadyState),
        Just(Subcommand::Sweep1d),
        Just(Subcommand::Sweep2d),
        Just(Subcommand::OptimalDelta),
        Just(Subcommand::OptimalCurve),
        Just(Subcommand::ThermalSweep),
        Just(Subcommand::ValidateAdiabatic),
        Just(Subcommand::Convergence),
    ]
}

fn axis() -> impl Strategy<Value = AxisConfig> {
    (
        prop::sample::select(vec!["delta1", "delta2", "delta_q", "g_ratio", "gamma"]),
        -2.0..0.0f64,
        0.1..2.0f64,
        2usize..300,
    )
        .prop_map(|(n, lo, hi, c)| AxisConfig::new(n, lo, hi, c))
}

fn params() -> impl Strategy<Value = Params> {
    (
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..2.0f64, 0.0..2.0f64),
        (prop::option::of(0.0..0.5f64), 1e-4..0.1f64, 0.1..3.0f64, 0.0..1.0f64, 0.0..1.0f64),
        (1e6..1e8f64, 1e10..1e11f64, 1e-3..0.1f64, 50.0..1000.0f64, 0.0..1.0f64),
    )
        .prop_map(|(a, b, c)| Params {
            delta1: a.0,
            delta2: a.1,
            delta_q: a.2,
            g1: a.3,
            g2: a.4,
            g_ratio: b.0,
            omega_drive: b.1,
            gamma: b.2,
            n_th1: b.3,
            n_th2: b.4,
            kappa_hz: c.0,
            omega1_hz: c.1,
            omega2_hz: c.1 * 1.05,
            temperature_max: c.2,
            delta0: c.3,
            cavity_decay: c.4,
            search_min: -1.0,
            search_max: 1.0,
        })
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        subcommand(),
        params(),
        prop::option::of(axis()),
        prop::sample::select(vec![Channel::Analytic, Channel::Numeric, Channel::Both]),
        (3usize..8, prop::option::of(1usize..64), any::<bool>()),
    )
        .prop_map(|(sub, params, ax, channel, (n, workers, to_file))| {
            let axes = match (sub, ax) {
                (Subcommand::Sweep1d, Some(a)) => vec![a],
                (Subcommand::Sweep2d, Some(a)) => {
                    let other = if a.name == "delta1" { "g_ratio" } else { "delta1" };
                    vec![a, AxisConfig::new(other, 0.0, 0.5, 7)]
                }
                _ => Vec::new(),
            };
            RunConfig {
                subcommand: sub,
                params,
                axes,
                output: OutputConfig {
                    path: to_file.then(|| "out/result.csv".into()),
                    format: if to_file { Format::Csv } else { Format::Auto },
                    svg: None,
                },
                compute: ComputeConfig {
                    channel,
                    truncation: n,
                    workers,
                    ..ComputeConfig::default()
                },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn serialize_then_parse_is_identity(cfg in config()) {
        let text = cfg.to_json();
        let back = parse_config_str(&text, None).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
