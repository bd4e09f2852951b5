use gentree::family::FamilyId;
use gentree::growth::fast_decode;
use gentree::oracle::{brute_enumerate, exact_ccocc_pmf, half_slope_paths, pmf_mean};
use gentree::pat::{pat, pat_generic, pat_grower};
use gentree::perm::{append_final, c_occ, c_occ_by_definition, pat_at, standardize, IndexSet, Permutation};
use gentree::rng::stream;
use gentree::stats::{gamma_sq, mu, mu_monte_carlo, Interval};
use gentree::tree::{decode, encode, jumps_of, level_count};
use gentree::walk::{solve_pq, valid_rotations, PermutationSampler};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = FamilyId> {
    proptest::sample::select(FamilyId::ALL.to_vec())
}

fn permutation(max: usize) -> impl Strategy<Value = Permutation> {
    (1..=max).prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|v| Permutation::new(v).unwrap())
}

/// The size itself, rounded up to even for the family with span 2.
fn feasible_size(f: FamilyId, raw: usize) -> usize {
    if f == FamilyId::FamB { raw + raw % 2 } else { raw }
}

fn catalan(n: u64) -> u128 {
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardize_of_window_is_pat_at(sigma in permutation(12), start in 0usize..12, len in 1usize..6) {
        let n = sigma.len();
        prop_assume!(start + len <= n);
        let slice = &sigma.values()[start..start + len];
        let direct = standardize(slice).unwrap();
        let via_set = pat_at(&sigma, &IndexSet::interval(start + 1, len).unwrap()).unwrap();
        prop_assert_eq!(direct, via_set);
    }

    #[test]
    fn consecutive_counts_agree(sigma in permutation(10), pi in permutation(4)) {
        prop_assert_eq!(c_occ(&pi, &sigma), c_occ_by_definition(&pi, &sigma));
    }

    #[test]
    fn inverse_is_involutive(sigma in permutation(15)) {
        prop_assert_eq!(sigma.inverse().inverse(), sigma);
    }

    #[test]
    fn append_final_places_the_site(sigma in permutation(10), m in 1usize..12) {
        prop_assume!(m <= sigma.len() + 1);
        let tau = append_final(&sigma, m).unwrap();
        prop_assert_eq!(tau.len(), sigma.len() + 1);
        prop_assert_eq!(tau.last() as usize, m);
        prop_assert_eq!(standardize(&tau.values()[..sigma.len()]).unwrap(), sigma);
    }

    #[test]
    fn sampled_members_round_trip(f in family(), raw in 1usize..40, seed in any::<u64>()) {
        let n = feasible_size(f, raw);
        let spec = f.spec();
        let sigma = PermutationSampler::new(f, n).unwrap().sample(&mut stream(seed, 0)).unwrap();
        prop_assert_eq!(sigma.len(), n);
        prop_assert!(spec.is_member(&sigma));
        let seq = encode(spec, &sigma).unwrap();
        prop_assert_eq!(&decode(spec, &seq).unwrap(), &sigma);
        prop_assert_eq!(&fast_decode(spec, &seq).unwrap(), &sigma);
    }

    #[test]
    fn pat_routes_agree(f in family(), seed in any::<u64>(), len in 1usize..6) {
        let w = solve_pq(f.spec()).unwrap();
        let alphabet = w.colored_alphabet(-6);
        let mut rng = stream(seed, 1);
        let js: Vec<_> = (0..len)
            .map(|_| alphabet[rand::Rng::random_range(&mut rng, 0..alphabet.len())])
            .collect();
        let generic = pat_generic(f.spec(), &js).unwrap();
        prop_assert_eq!(&pat_grower(f.spec(), &js).unwrap(), &generic);
        prop_assert_eq!(&pat(f.spec(), &js).unwrap(), &generic);
    }

    #[test]
    fn window_patterns_match_jumps(f in family(), raw in 8usize..30, seed in any::<u64>(), h in 1usize..5) {
        let n = feasible_size(f, raw);
        let spec = f.spec();
        let sigma = PermutationSampler::new(f, n).unwrap().sample(&mut stream(seed, 2)).unwrap();
        let seq = encode(spec, &sigma).unwrap();
        let jumps = jumps_of(&seq);
        let offset = spec.virtual_root as usize;
        for m in 1..=n + 1 - h {
            let idx: Vec<usize> = (m..m + h).map(|p| p - 1 + offset).collect();
            if idx[0] == 0 || idx.iter().any(|&i| seq.labels[i].value <= spec.c_of_h(h)) {
                continue;
            }
            let js: Vec<_> = idx.iter().map(|&i| jumps[i - 1]).collect();
            let want = pat_at(&sigma, &IndexSet::interval(m, h).unwrap()).unwrap();
            prop_assert_eq!(pat(spec, &js).unwrap(), want);
        }
    }

    #[test]
    fn cycle_lemma_has_one_rotation(ups in proptest::collection::vec(0i64..4, 0..20), seed in any::<u64>()) {
        let downs = ups.iter().sum::<i64>() as usize + 1;
        let mut steps = ups.clone();
        steps.extend(std::iter::repeat_n(-1, downs));
        let mut rng = stream(seed, 3);
        rand::seq::SliceRandom::shuffle(steps.as_mut_slice(), &mut rng);
        prop_assert_eq!(valid_rotations(&steps), 1);
    }

    #[test]
    fn interval_product_encloses_points(a in -3.0f64..3.0, b in -3.0f64..3.0, ra in 0.0f64..1.0, rb in 0.0f64..1.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let x = Interval::around(a, ra);
        let y = Interval::around(b, rb);
        let px = x.lo + u * x.width();
        let py = y.lo + v * y.width();
        prop_assert!((x * y).encloses(&Interval::point(px * py), 1e-12));
        prop_assert!((x + y).encloses(&Interval::point(px + py), 1e-12));
        prop_assert!((x - y).encloses(&Interval::point(px - py), 1e-12));
        prop_assert!(x.square().encloses(&Interval::point(px * px), 1e-12));
    }
}

#[test]
fn av123_and_av132_levels_are_catalan() {
    for n in 1..=14 {
        assert_eq!(level_count(FamilyId::Av123.spec(), n), catalan(n as u64), "n={n}");
        assert_eq!(level_count(FamilyId::Av132.spec(), n), catalan(n as u64), "n={n}");
    }
}

#[test]
fn schroeder_group_levels_coincide() {
    let group: Vec<FamilyId> = FamilyId::ALL.into_iter().filter(|f| f.is_schroeder_group()).collect();
    assert_eq!(group.len(), 6);
    for n in 1..=8 {
        let counts: Vec<usize> = group.iter().map(|f| brute_enumerate(f.spec(), n).unwrap().count).collect();
        assert!(counts.windows(2).all(|w| w[0] == w[1]), "n={n}: {counts:?}");
        assert_eq!(counts[0] as u128, level_count(group[0].spec(), n));
    }
    // large Schroeder numbers shifted by one
    let want = [1u128, 2, 6, 22, 90, 394, 1806, 8558];
    for (n, &c) in (1..=8).zip(&want) {
        assert_eq!(level_count(FamilyId::Av1423_4123.spec(), n), c);
    }
}

#[test]
fn fam_b_counts_lattice_paths() {
    for n in 1..=11 {
        assert_eq!(brute_enumerate(FamilyId::FamB.spec(), n).unwrap().count as u128, half_slope_paths(n), "n={n}");
    }
}

#[test]
fn fam_a_lies_inside_av213() {
    let av213 = Permutation::new(vec![2, 1, 3]).unwrap();
    for n in 1..=9 {
        let level = brute_enumerate(FamilyId::FamA.spec(), n).unwrap();
        assert!(level.count as u128 <= catalan(n as u64));
        assert!(level.members.iter().all(|p| !gentree::perm::contains(&av213, p)));
    }
}

#[test]
fn mu_interval_agrees_with_monte_carlo() {
    let cases = [(FamilyId::Av123, "21"), (FamilyId::Av1423_4123, "12"), (FamilyId::FamA, "132"), (FamilyId::FamB, "12")];
    for (i, (f, pi)) in cases.into_iter().enumerate() {
        let pi: Permutation = pi.parse().unwrap();
        let w = solve_pq(f.spec()).unwrap();
        let exact = mu(&w, &pi, 40).unwrap();
        let (est, se) = mu_monte_carlo(&w, &pi, 1_000_000, 40 + i as u64).unwrap();
        let gap = (est - exact.mid()).abs();
        assert!(gap <= 2.58 * se + exact.width() / 2.0, "{f} {pi}: {est} +- {se} vs {exact:?}");
    }
}

#[test]
fn exact_means_approach_mu() {
    let pi: Permutation = "21".parse().unwrap();
    let w = solve_pq(FamilyId::Av123.spec()).unwrap();
    let limit = mu(&w, &pi, 40).unwrap().mid();
    let gaps: Vec<f64> = (4..=10)
        .map(|n| {
            let pmf = exact_ccocc_pmf(FamilyId::Av123.spec(), n, &pi).unwrap();
            (pmf_mean(&pmf) / n as f64 - limit).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
}

#[test]
fn intervals_shrink_with_depth() {
    let pi: Permutation = "12".parse().unwrap();
    let w = solve_pq(FamilyId::Av1423_4123.spec()).unwrap();
    let shallow = gamma_sq(&w, &pi, 15).unwrap();
    let deep = gamma_sq(&w, &pi, 40).unwrap();
    assert!(deep.gamma2.width() < shallow.gamma2.width());
    assert!(shallow.gamma2.encloses(&deep.gamma2, 1e-12));
    assert!(shallow.mu.encloses(&deep.mu, 1e-12));
}
