// Randomized properties of the tests, the simulators and the search.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use fronthaul::capacity::{bfs_search, brute_force_oracle, ChannelEnsemble, QuantLadder, QuantNoiseModel, QuantSearch};
use fronthaul::sched::{edf_test, fixed_priority_test, rate_monotonic_order, Discipline, FlowSet};
use fronthaul::sim::{run_simulation, simulate_link, Phases, SimConfig};
use fronthaul::time::TimePs;
use fronthaul::topology::{aggregation_delay_bound, e2e_schedulable, max_queuing_per_hop, EdgeScheduler};
use fronthaul::traffic::RadioFlow;

fn flow_set() -> impl Strategy<Value = FlowSet> {
    (1u64..=3, prop::collection::vec((2u64..=15, 0u64..=4), 1..=5)).prop_map(|(c, v)| {
        let us = TimePs::from_us;
        let pairs: Vec<(TimePs, TimePs)> =
            v.iter().map(|&(t, slack)| (us(t), us((t + slack).saturating_sub(2).max(1)))).collect();
        FlowSet::uniform(us(c), &pairs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Preemptive EDF is exact under synchronous release: without overload
    /// the test and a hyperperiod simulation agree in both directions.
    #[test]
    fn preemptive_edf_matches_simulation(fs in flow_set()) {
        prop_assume!(fs.prefix_utilization_cmp(fs.len()) != std::cmp::Ordering::Greater);
        let verdict = edf_test(&fs, true).schedulable;
        let sim = simulate_link(&fs, Discipline::Edf, true).unwrap();
        prop_assert_eq!(verdict, sim.misses == 0);
    }

    /// Sufficient tests never pass a set that misses in simulation.
    #[test]
    fn passing_sets_do_not_miss(fs in flow_set()) {
        let fs = rate_monotonic_order(&fs);
        for preemptive in [true, false] {
            if edf_test(&fs, preemptive).schedulable {
                prop_assert_eq!(simulate_link(&fs, Discipline::Edf, preemptive).unwrap().misses, 0);
            }
            if fixed_priority_test(&fs, preemptive).schedulable {
                prop_assert_eq!(simulate_link(&fs, Discipline::FixedPriority, preemptive).unwrap().misses, 0);
            }
        }
    }

    /// Longer deadlines never turn a passing set into a failing one.
    #[test]
    fn relaxing_deadlines_keeps_verdicts(fs in flow_set(), extra in 1u64..=5) {
        let relaxed = FlowSet::uniform(
            fs.tx_time(),
            &fs.flows().iter().map(|f| (f.period, f.deadline + TimePs::from_us(extra))).collect::<Vec<_>>(),
        ).unwrap();
        for preemptive in [true, false] {
            if edf_test(&fs, preemptive).schedulable {
                prop_assert!(edf_test(&relaxed, preemptive).schedulable);
            }
            if fixed_priority_test(&fs, preemptive).schedulable {
                prop_assert!(fixed_priority_test(&relaxed, preemptive).schedulable);
            }
        }
    }

    /// A preemptive verdict is never worse than the non-preemptive one.
    #[test]
    fn preemption_only_helps(fs in flow_set()) {
        if edf_test(&fs, false).schedulable {
            prop_assert!(edf_test(&fs, true).schedulable);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Per-hop queuing and post-edge delay stay inside their bounds for any
    /// phase vector.
    #[test]
    fn simulated_delays_respect_bounds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = random_tree(&mut rng);
        let flows = random_flows(&mut rng, &topo, 0.95, (1.0, 1.0));
        let policy = random_policy(&mut rng, true);
        let cfg = SimConfig::new(policy, TimePs::from_us(30)).with_phases(Phases::Random).with_seed(seed).with_drain(true);
        let trace = run_simulation(&topo, &flows, &cfg).unwrap();
        prop_assert!(trace.max_post_edge() <= aggregation_delay_bound(&topo).total);
        for level in 1..=topo.height() as usize {
            prop_assert!(trace.level_max_wait[level] <= max_queuing_per_hop(&topo, level).unwrap());
        }
        let generated: u64 = trace.flows.iter().map(|f| f.generated).sum();
        let delivered: u64 = trace.flows.iter().map(|f| f.delivered).sum();
        prop_assert_eq!(generated, delivered);
    }

    /// Same inputs, same trace.
    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = random_tree(&mut rng);
        let flows = random_flows(&mut rng, &topo, 0.9, (1.0, 1.0));
        let cfg = SimConfig::new(EdgeScheduler::Edf, TimePs::from_us(20)).with_phases(Phases::Random).with_seed(seed);
        prop_assert_eq!(run_simulation(&topo, &flows, &cfg).unwrap(), run_simulation(&topo, &flows, &cfg).unwrap());
    }

    /// Edge verdicts depend only on the radios of that edge.
    #[test]
    fn edge_verdicts_are_local(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = random_tree(&mut rng);
        let flows = random_flows(&mut rng, &topo, 0.9, (0.7, 1.3));
        let Ok(full) = e2e_schedulable(&topo, &flows, EdgeScheduler::Edf) else { return Ok(()) };
        // doubling every radio rate on edge 0 leaves the other edges alone
        let changed: Vec<RadioFlow> = flows
            .iter()
            .map(|f| match f.edge {
                0 => RadioFlow::fixed_rate(f.id.0, (f.rate_bps().unwrap() * 2) as u64, f.payload_bits, f.deadline, 0).unwrap(),
                _ => f.clone(),
            })
            .collect();
        let Ok(other) = e2e_schedulable(&topo, &changed, EdgeScheduler::Edf) else { return Ok(()) };
        for (a, b) in full.edges.iter().zip(&other.edges).skip(1) {
            prop_assert_eq!(a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    /// The lattice search reaches the brute-force optimum.
    #[test]
    fn search_is_optimal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (topo, radios) = random_adc_scenario(&mut rng, 3);
        let ladder = QuantLadder::new(vec![2, 6, 10]).unwrap();
        let ens = ChannelEnsemble::rayleigh(radios.len(), 2, 20, 10.0, 1.0, seed).unwrap();
        let search = QuantSearch {
            topology: &topo,
            radios: &radios,
            ladder: &ladder,
            ensemble: &ens,
            noise: QuantNoiseModel::default(),
            policy: EdgeScheduler::Edf,
        };
        let bfs = bfs_search(&search).unwrap();
        let oracle = brute_force_oracle(&search, 1000).unwrap();
        prop_assert_eq!(bfs.capacity, oracle.capacity);
    }
}
