use super::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn int_domain(name: &str, values: &[i64]) -> ParamDomain {
    ParamDomain::new(name, values.iter().map(|&v| ParamValue::Int(v)).collect()).unwrap()
}

/// x, y over {1, 2, 4} constrained by x*y <= 4.
fn xy_space() -> SearchSpace {
    let domains = vec![int_domain("x", &[1, 2, 4]), int_domain("y", &[1, 2, 4])];
    let c = parse_constraint("x*y <= 4", &domains).unwrap();
    enumerate_valid(domains, vec![c]).unwrap()
}

fn cfg(indices: &[u32]) -> Configuration {
    Configuration::new(indices.to_vec())
}

// Brute-force oracle: enumerate the full Cartesian product with an odometer
// and keep the combinations the native predicate accepts.
fn brute_force_valid(
    domains: &[ParamDomain],
    accept: impl Fn(&[i64]) -> bool,
) -> Vec<Configuration> {
    let dims = domains.len();
    let mut out = Vec::new();
    let mut current = vec![0u32; dims];
    'outer: loop {
        let values: Vec<i64> = current
            .iter()
            .enumerate()
            .map(|(d, &i)| match &domains[d].values()[i as usize] {
                ParamValue::Int(v) => *v,
                other => panic!("oracle expects integer domains, got {other}"),
            })
            .collect();
        if accept(&values) {
            out.push(Configuration::new(current.clone()));
        }
        for d in (0..dims).rev() {
            current[d] += 1;
            if (current[d] as usize) < domains[d].len() {
                continue 'outer;
            }
            current[d] = 0;
        }
        break;
    }
    out
}

// Independent re-statement of the three neighborhood definitions.
fn oracle_is_neighbor(a: &[u32], b: &[u32], kind: NeighborhoodKind) -> bool {
    let deltas: Vec<i64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as i64 - y as i64).abs())
        .collect();
    match kind {
        NeighborhoodKind::Hamming => deltas.iter().filter(|&&d| d != 0).count() == 1,
        NeighborhoodKind::Adjacent => {
            deltas.iter().all(|&d| d <= 1) && deltas.contains(&1)
        }
        NeighborhoodKind::StrictlyAdjacent => {
            deltas.iter().all(|&d| d <= 1) && deltas.iter().filter(|&&d| d == 1).count() == 1
        }
    }
}

fn oracle_neighbors(
    valid: &[Configuration],
    center: &Configuration,
    kind: NeighborhoodKind,
) -> Vec<Configuration> {
    valid
        .iter()
        .filter(|c| oracle_is_neighbor(center.indices(), c.indices(), kind))
        .cloned()
        .collect()
}

fn oracle_repair(valid: &[Configuration], c: &Configuration) -> Configuration {
    let mut best: Option<(usize, Configuration)> = None;
    for cand in valid {
        let d = cand
            .indices()
            .iter()
            .zip(c.indices())
            .filter(|(x, y)| x != y)
            .count();
        let better = match &best {
            None => true,
            Some((bd, bc)) => d < *bd || (d == *bd && cand < bc),
        };
        if better {
            best = Some((d, cand.clone()));
        }
    }
    best.unwrap().1
}

#[test]
fn parse_well_formed_constraint() {
    let domains = vec![int_domain("x", &[1, 2, 4]), int_domain("y", &[1, 2, 4])];
    let c = parse_constraint("x*y <= 4", &domains).unwrap();
    assert_eq!(c.source(), "x*y <= 4");
}

#[test]
fn parse_malformed_is_syntax_error() {
    let domains = vec![int_domain("x", &[1, 2, 4]), int_domain("y", &[1, 2, 4])];
    assert!(matches!(
        parse_constraint("x <", &domains),
        Err(SpaceError::Syntax { .. })
    ));
}

#[test]
fn parse_undeclared_identifier() {
    let domains = vec![int_domain("x", &[1, 2, 4]), int_domain("y", &[1, 2, 4])];
    match parse_constraint("z == 1", &domains) {
        Err(SpaceError::UnknownParameter { name }) => assert_eq!(name, "z"),
        other => panic!("expected UnknownParameter, got {other:?}"),
    }
}

#[test]
fn parse_type_errors() {
    let domains = vec![
        int_domain("x", &[1, 2, 4]),
        ParamDomain::new(
            "mode",
            vec![
                ParamValue::Str("fast".into()),
                ParamValue::Str("slow".into()),
            ],
        )
        .unwrap(),
    ];
    // String under arithmetic and under ordering are both rejected.
    assert!(matches!(
        parse_constraint("mode + 1 == 2", &domains),
        Err(SpaceError::Type(_))
    ));
    assert!(matches!(
        parse_constraint("mode < 'fast'", &domains),
        Err(SpaceError::Type(_))
    ));
    // Modulo needs integers on both sides.
    assert!(matches!(
        parse_constraint("x % 2.5 == 0", &domains),
        Err(SpaceError::Type(_))
    ));
    // Strings are fine under equality.
    assert!(parse_constraint("mode == 'fast'", &domains).is_ok());
    // A non-boolean expression is not a constraint.
    assert!(matches!(
        parse_constraint("x + 1", &domains),
        Err(SpaceError::Type(_))
    ));
}

#[test]
fn parse_grammar_corners() {
    let domains = vec![
        int_domain("a", &[0, 1, 2]),
        int_domain("b", &[0, 1, 2]),
        ParamDomain::new("flag", vec![ParamValue::Bool(false), ParamValue::Bool(true)])
            .unwrap(),
    ];
    for src in [
        "a == 0 || b == 0 && flag",
        "a == 0 or b == 0 and flag",
        "!(a == b)",
        "!flag",
        "(a + b) % 2 == 0",
        "a / b >= 0.5",
        "a * 2 + b - 1 <= 3",
    ] {
        parse_constraint(src, &domains).unwrap_or_else(|e| panic!("{src:?} failed: {e}"));
    }
    assert!(matches!(
        parse_constraint("a = 1", &domains),
        Err(SpaceError::Syntax { .. })
    ));
    assert!(matches!(
        parse_constraint("(a == 1", &domains),
        Err(SpaceError::Syntax { .. })
    ));
    assert!(matches!(
        parse_constraint("", &domains),
        Err(SpaceError::Syntax { .. })
    ));
}

#[test]
fn modulo_semantics() {
    let domains = vec![int_domain("a", &[0, 3, 6, 7]), int_domain("b", &[0, 2, 3])];
    let c = parse_constraint("a % 3 == 0", &domains).unwrap();
    assert!(c.evaluate(|d| &domains[d].values()[[2, 0][d]])); // a=6
    assert!(!c.evaluate(|d| &domains[d].values()[[3, 0][d]])); // a=7
    // Modulo by zero never satisfies the comparison but never aborts.
    let z = parse_constraint("a % b == 0", &domains).unwrap();
    assert!(!z.evaluate(|d| &domains[d].values()[[1, 0][d]])); // 3 % 0
    assert!(z.evaluate(|d| &domains[d].values()[[1, 2][d]])); // 3 % 3
}

#[test]
fn is_valid_matches_hand_checks() {
    let space = xy_space();
    // values (4,1) -> indices (2,0): 4*1 <= 4
    assert!(space.is_valid(&cfg(&[2, 0])));
    // values (4,2) -> indices (2,1): 8 > 4
    assert!(!space.is_valid(&cfg(&[2, 1])));
}

#[test]
fn empty_constraint_list_accepts_everything() {
    let domains = vec![int_domain("x", &[1, 2]), int_domain("y", &[1, 2])];
    let space = enumerate_valid(domains, vec![]).unwrap();
    assert_eq!(space.cartesian_size(), 4);
    assert_eq!(space.constrained_size(), 4);
}

#[test]
fn enumerate_xy_space() {
    let space = xy_space();
    assert_eq!(space.cartesian_size(), 9);
    assert_eq!(space.constrained_size(), 6);
    let expected: Vec<Configuration> = [
        [0u32, 0],
        [0, 1],
        [0, 2],
        [1, 0],
        [1, 1],
        [2, 0],
    ]
    .iter()
    .map(|ix| cfg(ix))
    .collect();
    assert_eq!(space.valid_set(), expected.as_slice());
}

#[test]
fn enumerate_unsatisfiable_is_empty_space() {
    let domains = vec![int_domain("x", &[1, 2, 4])];
    let c = parse_constraint("x > 100", &domains).unwrap();
    assert!(matches!(
        enumerate_valid(domains, vec![c]),
        Err(SpaceError::EmptySpace)
    ));
}

#[test]
fn enumerate_agrees_with_brute_force_oracle() {
    let domains = vec![
        int_domain("x", &[1, 2, 4]),
        int_domain("y", &[1, 2, 4]),
        int_domain("z", &[0, 1, 2, 3]),
    ];
    let constraints = vec![
        parse_constraint("x*y <= 4", &domains).unwrap(),
        parse_constraint("(x + z) % 2 == 0", &domains).unwrap(),
    ];
    let space = enumerate_valid(domains.clone(), constraints).unwrap();
    let oracle = brute_force_valid(&domains, |v| v[0] * v[1] <= 4 && (v[0] + v[2]) % 2 == 0);
    assert_eq!(space.valid_set(), oracle.as_slice());
}

#[test]
fn neighbors_match_spec_examples() {
    let space = xy_space();
    // (1,1) -> indices (0,0); hamming neighbors are (2,1),(4,1),(1,2),(1,4).
    let got = space.neighbors(&cfg(&[0, 0]), NeighborhoodKind::Hamming);
    let expected: Vec<Configuration> =
        [[0u32, 1], [0, 2], [1, 0], [2, 0]].iter().map(|ix| cfg(ix)).collect();
    assert_eq!(got.as_ref(), expected.as_slice());

    // (2,2) -> indices (1,1); strictly adjacent keeps (1,2) and (2,1) only.
    let got = space.neighbors(&cfg(&[1, 1]), NeighborhoodKind::StrictlyAdjacent);
    let expected: Vec<Configuration> = [[0u32, 1], [1, 0]].iter().map(|ix| cfg(ix)).collect();
    assert_eq!(got.as_ref(), expected.as_slice());
}

#[test]
fn neighbors_of_singleton_space_are_empty() {
    let domains = vec![int_domain("x", &[1])];
    let space = enumerate_valid(domains, vec![]).unwrap();
    for kind in NeighborhoodKind::ALL {
        assert!(space.neighbors(&cfg(&[0]), kind).is_empty());
    }
}

#[test]
fn neighbors_match_oracle_on_every_valid_config() {
    let domains = vec![
        int_domain("x", &[1, 2, 4]),
        int_domain("y", &[1, 2, 4]),
        int_domain("z", &[0, 1, 2, 3]),
    ];
    let constraints = vec![parse_constraint("x*y + z <= 6", &domains).unwrap()];
    let space = enumerate_valid(domains, constraints).unwrap();
    for center in space.valid_set() {
        for kind in NeighborhoodKind::ALL {
            let got = space.neighbors(center, kind);
            let expected = oracle_neighbors(space.valid_set(), center, kind);
            assert_eq!(got.as_ref(), expected.as_slice(), "{center} {kind}");
            assert!(!got.contains(center));
        }
        // Strictness ordering: strictly_adjacent is contained in both others.
        let strict = space.neighbors(center, NeighborhoodKind::StrictlyAdjacent);
        let adjacent = space.neighbors(center, NeighborhoodKind::Adjacent);
        let hamming = space.neighbors(center, NeighborhoodKind::Hamming);
        for n in strict.iter() {
            assert!(adjacent.contains(n));
            assert!(hamming.contains(n));
            assert_eq!(hamming_distance(center, n).unwrap(), 1);
        }
    }
}

#[test]
fn random_valid_unique_config() {
    let domains = vec![int_domain("x", &[1])];
    let space = enumerate_valid(domains, vec![]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(space.random_valid(&mut rng), cfg(&[0]));
}

#[test]
fn random_valid_is_deterministic_by_seed() {
    let space = xy_space();
    let mut a = ChaCha8Rng::seed_from_u64(99);
    let mut b = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..32 {
        assert_eq!(space.random_valid(&mut a), space.random_valid(&mut b));
    }
}

#[test]
fn random_valid_is_uniform_over_the_valid_set() {
    let space = xy_space();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 60_000usize;
    let mut counts = vec![0usize; space.valid_set().len()];
    for _ in 0..draws {
        let c = space.random_valid(&mut rng);
        counts[space.valid_rank(&c).unwrap()] += 1;
    }
    // Binomial: mean 10000, sigma = sqrt(60000 * 1/6 * 5/6) ~ 91.3.
    let sigma = (draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
    for (i, &n) in counts.iter().enumerate() {
        let dev = (n as f64 - 10_000.0).abs();
        assert!(dev < 5.0 * sigma, "config {i} count {n} deviates {dev:.1}");
    }
}

#[test]
fn repair_matches_spec_examples() {
    let space = xy_space();
    assert_eq!(space.repair(&cfg(&[0, 0])), cfg(&[0, 0]));
    // values (4,4) -> indices (2,2): nearest valid are (1,4)=(0,2) and
    // (4,1)=(2,0), both at Hamming 1; (0,2) wins lexicographically.
    assert_eq!(space.repair(&cfg(&[2, 2])), cfg(&[0, 2]));
    // values (4,2) -> indices (2,1): distance-1 candidates are (0,1), (1,1),
    // (2,0); the smallest index vector wins.
    assert_eq!(space.repair(&cfg(&[2, 1])), cfg(&[0, 1]));
}

#[test]
fn repair_matches_oracle_and_is_idempotent() {
    let domains = vec![
        int_domain("x", &[1, 2, 4, 8]),
        int_domain("y", &[1, 2, 4, 8]),
        int_domain("z", &[0, 1, 2]),
    ];
    let constraints = vec![parse_constraint("x*y <= 8 && z < x", &domains).unwrap()];
    let space = enumerate_valid(domains.clone(), constraints).unwrap();
    let all = brute_force_valid(&domains, |_| true);
    for c in &all {
        let repaired = space.repair(c);
        assert!(space.is_valid(&repaired));
        assert_eq!(repaired, oracle_repair(space.valid_set(), c), "input {c}");
        assert_eq!(space.repair(&repaired), repaired);
    }
}

#[test]
fn hamming_distance_basics() {
    assert_eq!(hamming_distance(&cfg(&[0, 0]), &cfg(&[0, 2])).unwrap(), 1);
    assert_eq!(hamming_distance(&cfg(&[1, 1]), &cfg(&[1, 1])).unwrap(), 0);
    assert_eq!(hamming_distance(&cfg(&[0, 0]), &cfg(&[2, 2])).unwrap(), 2);
    assert!(matches!(
        hamming_distance(&cfg(&[0]), &cfg(&[0, 1])),
        Err(SpaceError::LengthMismatch { .. })
    ));
}

#[test]
fn crossover_identical_parents() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = cfg(&[0, 1, 2]);
    let child = crossover_uniform(&a, &a, &mut rng).unwrap();
    assert_eq!(child, a);
}

#[test]
fn crossover_positions_come_from_parents() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = cfg(&[0, 0]);
    let b = cfg(&[2, 2]);
    let mut first_counts = [0usize; 2];
    let children = 4_000usize;
    for _ in 0..children {
        let child = crossover_uniform(&a, &b, &mut rng).unwrap();
        for (count, &idx) in first_counts.iter_mut().zip(child.indices()) {
            assert!(idx == 0 || idx == 2);
            if idx == 0 {
                *count += 1;
            }
        }
    }
    // Binomial: mean 2000, sigma = sqrt(4000 * 0.25) ~ 31.6.
    let sigma = (children as f64 * 0.25).sqrt();
    for (d, &n) in first_counts.iter().enumerate() {
        let dev = (n as f64 - 2_000.0).abs();
        assert!(dev < 5.0 * sigma, "dim {d} count {n} deviates {dev:.1}");
    }
    assert!(matches!(
        crossover_uniform(&cfg(&[0]), &cfg(&[0, 1]), &mut rng),
        Err(SpaceError::LengthMismatch { .. })
    ));
}

#[test]
fn domain_rejects_duplicates_and_empty() {
    assert!(matches!(
        ParamDomain::new("x", vec![]),
        Err(SpaceError::InvalidDomain { .. })
    ));
    assert!(matches!(
        ParamDomain::new("x", vec![ParamValue::Int(1), ParamValue::Int(1)]),
        Err(SpaceError::InvalidDomain { .. })
    ));
}

#[test]
fn neighbor_memo_is_shared_across_threads() {
    let space = std::sync::Arc::new(xy_space());
    let mut handles = Vec::new();
    for _ in 0..4 {
        let space = std::sync::Arc::clone(&space);
        handles.push(std::thread::spawn(move || {
            for center in space.valid_set() {
                for kind in NeighborhoodKind::ALL {
                    let n = space.neighbors(center, kind);
                    assert!(n.iter().all(|c| space.is_valid(c)));
                }
            }
        }));
    }
    for h in handles {
        h.join().unwrap();
    }
}

proptest! {
    #[test]
    fn hamming_metric_axioms(
        a in proptest::collection::vec(0u32..6, 1..6),
        b_seed in proptest::collection::vec(0u32..6, 1..6),
        c_seed in proptest::collection::vec(0u32..6, 1..6),
    ) {
        let len = a.len();
        let b: Vec<u32> = (0..len).map(|i| b_seed[i % b_seed.len()]).collect();
        let c: Vec<u32> = (0..len).map(|i| c_seed[i % c_seed.len()]).collect();
        let (a, b, c) = (Configuration::new(a), Configuration::new(b), Configuration::new(c));
        let dab = hamming_distance(&a, &b).unwrap();
        let dba = hamming_distance(&b, &a).unwrap();
        let dac = hamming_distance(&a, &c).unwrap();
        let dcb = hamming_distance(&c, &b).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        prop_assert_eq!(dab == 0, a == b);
        prop_assert!(dab <= dac + dcb);
    }

    #[test]
    fn random_spaces_match_brute_force(
        sizes in proptest::collection::vec(2usize..5, 2..4),
        limit in 2i64..30,
        modulus in 2i64..5,
    ) {
        let domains: Vec<ParamDomain> = sizes
            .iter()
            .enumerate()
            .map(|(d, &n)| {
                int_domain(&format!("p{d}"), &(0..n as i64).map(|v| v + 1).collect::<Vec<_>>())
            })
            .collect();
        let src_product = format!("p0*p1 <= {limit}");
        let src_mod = format!("(p0 + p1) % {modulus} != 0");
        let constraints = vec![
            parse_constraint(&src_product, &domains).unwrap(),
            parse_constraint(&src_mod, &domains).unwrap(),
        ];
        let oracle = brute_force_valid(&domains, |v| {
            v[0] * v[1] <= limit && (v[0] + v[1]) % modulus != 0
        });
        match enumerate_valid(domains, constraints) {
            Ok(space) => {
                prop_assert_eq!(space.valid_set(), oracle.as_slice());
                for center in space.valid_set().iter().take(8) {
                    for kind in NeighborhoodKind::ALL {
                        let got = space.neighbors(center, kind);
                        let expected = oracle_neighbors(space.valid_set(), center, kind);
                        prop_assert_eq!(got.as_ref(), expected.as_slice());
                    }
                }
            }
            Err(SpaceError::EmptySpace) => prop_assert!(oracle.is_empty()),
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
        }
    }
}
