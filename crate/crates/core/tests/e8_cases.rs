//! E8 integration checks: twisted twining characters against closed eta-form
//! oracles, the Z3×Z3 orbifold, and the S3 module-character set.

use orbifold_core::characters::*;
use orbifold_core::cyclotomic::Cyclotomic;
use orbifold_core::lattice::LatticeMap;
use orbifold_core::lifting::{lift_compose, standard_lift, Lift};
use orbifold_core::qseries::{eta_expand, EtaQuotient, QSeries};
use orbifold_core::standard;
use orbifold_core::twisted::build_twisted_module;
use orbifold_core::znum::{rat, rat_int, Rat};
use num::traits::Signed;

fn assert_series_eq(a: &QSeries, b: &QSeries, upto: &Rat) {
    for (e, c) in a.terms() {
        if e <= upto {
            assert!(b.coeff(e).eq(c), "mismatch at q^{e}: {:?} vs {:?}", c, b.coeff(e));
        }
    }
    for (e, c) in b.terms() {
        if e <= upto {
            assert!(a.coeff(e).eq(c), "mismatch at q^{e} (other side)");
        }
    }
}

#[test]
fn z2xz2_direct_vs_closed_forms() {
    let model = standard::e8_model();
    let lat = &model.lattice;
    let g = standard_lift(lat, &model.maps["s"]).unwrap();
    let h = standard_lift(lat, &model.maps["sneg"]).unwrap();
    assert!(model.maps["s"].commutes_with(&model.maps["sneg"]));

    let order = rat_int(2);
    let deep = rat_int(3); // eta-product margin so the oracle is complete past `order`
    let t_gh = twining_character(lat, &g.lift, &h.lift, &order).unwrap();
    // closed form 2 (η(τ)² / (η(τ/2) η(2τ)))^4
    let quot = EtaQuotient::new(vec![
        (rat_int(1), 8),
        (rat(1, 2), -4),
        (rat_int(2), -4),
    ]);
    let closed = eta_expand(&quot, &deep).scale_rat(&rat_int(2));
    assert_series_eq(&t_gh, &closed, &order);

    // T(g, ĝĥ) vs e^{2πi/12} 2 (η(τ)²/(η((τ+1)/2) η(2τ)))^4
    let gh_lift = lift_compose(lat, &g.lift, &h.lift);
    let t_ggh = twining_character(lat, &g.lift, &gh_lift, &order).unwrap();
    let quot2 = EtaQuotient::new(vec![(rat_int(1), 8), (rat_int(2), -4)])
        .with_offset(rat(1, 2), rat(1, 2), -4);
    let closed2 = eta_expand(&quot2, &deep)
        .scale(&Cyclotomic::root_of_unity(12, 1))
        .scale_rat(&rat_int(2));
    assert_series_eq(&t_ggh, &closed2, &order);
}

#[test]
fn z2xz2_types_match() {
    let model = standard::e8_model();
    let lat = &model.lattice;
    assert_eq!(sector_type(lat, &model.maps["s"]).unwrap(), 1);
    assert_eq!(sector_type(lat, &model.maps["sneg"]).unwrap(), 1);
    let prod = model.maps["s"].then(&model.maps["sneg"]);
    assert_eq!(sector_type(lat, &prod).unwrap(), 0);
    // anomalous as a product group
    let report = anomaly_check(
        lat,
        &GroupShape::Product { a: &model.maps["s"], big_a: &model.maps["sneg"], p: 2 },
    )
    .unwrap();
    assert_eq!(report.verdict, AnomalyVerdict::Anomalous);
}

#[test]
fn z3xz3_line_types_all_zero() {
    let model = standard::e8_model();
    let lat = &model.lattice;
    let a = &model.maps["g3a"];
    let b = &model.maps["g3b"];
    for g in [a.clone(), b.clone(), a.then(b), a.then(&b.pow(2))] {
        assert_eq!(sector_type(lat, &g).unwrap(), 0);
    }
    let report =
        anomaly_check(lat, &GroupShape::Product { a, big_a: b, p: 3 }).unwrap();
    assert_eq!(report.verdict, AnomalyVerdict::Trivial);
}

#[test]
fn z3xz3_cross_orbit_characters_are_constant() {
    // pairs (g, h) generating the whole group: direct construction gives a
    // constant series (single term)
    let model = standard::e8_model();
    let lat = &model.lattice;
    let a = standard_lift(lat, &model.maps["g3a"]).unwrap();
    let b = standard_lift(lat, &model.maps["g3b"]).unwrap();
    let w = build_twisted_module(lat, &a.lift).unwrap();
    assert_eq!(w.dim, 3);
    let order = rat_int(2);
    let t = twining_character(lat, &a.lift, &b.lift, &order).unwrap();
    assert_eq!(t.terms().count(), 1, "cross-line character must be constant: {t:?}");
    let e0 = t.min_exponent().unwrap();
    assert_eq!(e0, rat_int(0));
}

#[test]
fn z3xz3_orbifold_recovers_e8() {
    let model = standard::e8_model();
    let lat = &model.lattice;
    let gens = vec![
        ("a".to_string(), model.maps["g3a"].clone()),
        ("b".to_string(), model.maps["g3b"].clone()),
    ];
    let order = rat_int(3);
    let report = general_orbifold_char(lat, &gens, &order).unwrap();
    let id = Lift::identity(8);
    let e8_char = twining_character(lat, &id, &id, &order).unwrap();
    assert_series_eq(&report.character, &e8_char, &order);
}

#[test]
fn z6_general_equals_effcyc() {
    // the order-6 cyclic subgroup as a degenerate (q,p,φ) = (3,2,1) instance
    let model = standard::e8_model();
    let lat = &model.lattice;
    let a = &model.maps["g3a"];
    let big_a = &model.maps["neg"];
    let order = rat_int(2);
    let eff = effcyc_orbifold_char(lat, a, big_a, 3, 2, 1, &order).unwrap();
    let gens = vec![("g".to_string(), model.maps["g6"].clone())];
    let gen_report = general_orbifold_char(lat, &gens, &order).unwrap();
    assert_series_eq(&eff.character, &gen_report.character, &order);
    // both must equal the E8 character
    let id = Lift::identity(8);
    let e8_char = twining_character(lat, &id, &id, &order).unwrap();
    assert_series_eq(&eff.character, &e8_char, &order);
}

#[test]
fn s3_demo_module_characters() {
    // sectors e, s, t with pattern-normalized cocycles; the eight module
    // characters match the explicit combinations of T(e,·), T(s,·), T(t,·)
    let model = standard::e8_model();
    let lat = &model.lattice;
    let s = &model.maps["s"];
    let t = &model.maps["t"];
    let order = rat_int(2);

    let (s_lift, t_lift) = orbifold_core::lifting::split_lift_semidirect(lat, s, t, -1, 3, 2).unwrap();

    // untwisted sector: C_e = S3, classes e (1), s-class (3 elements), t-class (2)
    let id = Lift::identity(8);
    let t_ee = twining_character(lat, &id, &id, &order).unwrap();
    let t_es = twining_character(lat, &id, &s_lift, &order).unwrap();
    let t_et = twining_character(lat, &id, &t_lift, &order).unwrap();
    // θ_{D4}(τ)/η(2τ)^4 oracle for T(e, s): the fixed lattice of s
    {
        let data = orbifold_core::lattice::analyze_automorphism(lat, s).unwrap();
        assert_eq!(data.fixed_basis.len(), 4);
        let closed = untwisted_character_closed(lat, s, &order, None).unwrap();
        for (e, c) in t_es.terms() {
            assert!(closed.coeff(e).eq(c));
        }
    }

    let third = |a: &QSeries, b: &QSeries, c: &QSeries, ca: i64, cb: i64, cc: i64, den: i64| {
        a.scale_rat(&rat(ca, den))
            .add(&b.scale_rat(&rat(cb, den)))
            .add(&c.scale_rat(&rat(cc, den)))
    };
    // e-sector characters: trivial, sign, standard representation
    let chi_e0 = third(&t_ee, &t_es, &t_et, 1, 3, 2, 6);
    let chi_esgn = third(&t_ee, &t_es, &t_et, 1, -3, 2, 6);
    let chi_e2 = third(&t_ee, &t_es, &t_et, 2, 0, -2, 6);
    for chi in [&chi_e0, &chi_esgn, &chi_e2] {
        assert!(chi.has_integer_coeffs(), "module characters count states");
        for (_, c) in chi.terms() {
            assert!(!c.as_rat().unwrap().is_negative());
        }
    }

    // s-twisted sector: C_s = <s> of order 2, type r_s = 1
    let r_s = sector_type(lat, s).unwrap();
    assert_eq!(r_s, 1);
    let sector_s = SectorActions::cyclic_sector(lat, &s_lift, 2, r_s, &order).unwrap();
    // cocycle pattern: O² = ξ_2^{r_s} = -1
    let o = &sector_s.actions[1];
    let osq = o.mul(o).as_scalar().unwrap();
    assert!(osq.eq(&Cyclotomic::from_i64(-1)));
    let table_s = cyclic_projective_characters(2, r_s);
    let chis_s = sector_s.module_characters(&table_s, &order).unwrap();
    // the paper's combinations (T(s,e) ∓ ξ_4 T(s,s))/2 with our T's
    let t_se = twining_with_action(&sector_s.module, &sector_s.lifts[0], &sector_s.actions[0], &order).unwrap();
    let t_ss = twining_with_action(&sector_s.module, &sector_s.lifts[1], &sector_s.actions[1], &order).unwrap();
    let i_unit = Cyclotomic::root_of_unity(4, 1);
    let expect_a = t_se.add(&t_ss.scale(&i_unit.neg())).scale_rat(&rat(1, 2));
    let expect_b = t_se.add(&t_ss.scale(&i_unit)).scale_rat(&rat(1, 2));
    let matches = |x: &QSeries, y: &QSeries| -> bool {
        x.terms().all(|(e, c)| y.coeff(e).eq(c)) && y.terms().all(|(e, c)| x.coeff(e).eq(c))
    };
    assert!(
        (matches(&chis_s[0], &expect_a) && matches(&chis_s[1], &expect_b))
            || (matches(&chis_s[0], &expect_b) && matches(&chis_s[1], &expect_a)),
        "s-sector module characters must be the ξ_4-combinations"
    );
    // Schur-Weyl completeness: Σ_χ χ(1) χ_{[s,χ]} = T(ŝ, e)
    let sum = chis_s[0].add(&chis_s[1]);
    assert!(matches(&sum, &t_se));

    // t-twisted sector: C_t = <t> of order 3, type r_t = 2
    let r_t = sector_type(lat, t).unwrap();
    assert_eq!(r_t, 2);
    let sector_t = SectorActions::cyclic_sector(lat, &t_lift, 3, r_t, &order).unwrap();
    let table_t = cyclic_projective_characters(3, r_t);
    let chis_t = sector_t.module_characters(&table_t, &order).unwrap();
    let t_te = twining_with_action(&sector_t.module, &sector_t.lifts[0], &sector_t.actions[0], &order).unwrap();
    let mut sum_t = QSeries::zero(order.clone());
    for chi in &chis_t {
        sum_t = sum_t.add(chi);
    }
    assert!(matches(&sum_t, &t_te), "Schur-Weyl completeness in the t-sector");
    // the ξ_9-combination structure: χ_{t,l} = (T(t,e) + ξ_9^{-2-3l} T(t,t) + ξ_9^{-4-6l} T(t,t²))/3
    let t_tt = twining_with_action(&sector_t.module, &sector_t.lifts[1], &sector_t.actions[1], &order).unwrap();
    let t_tt2 = twining_with_action(&sector_t.module, &sector_t.lifts[2], &sector_t.actions[2], &order).unwrap();
    for l in 0..3i64 {
        let c1 = Cyclotomic::root_of_unity(9, -2 - 3 * l);
        let c2 = Cyclotomic::root_of_unity(9, -4 - 6 * l);
        let expect = t_te
            .add(&t_tt.scale(&c1))
            .add(&t_tt2.scale(&c2))
            .scale_rat(&rat(1, 3));
        assert!(
            chis_t.iter().any(|x| matches(x, &expect)),
            "t-sector character for l = {l} missing"
        );
    }
}

fn s3_group_and_tables(
    lat: &orbifold_core::lattice::GramLattice,
    s: &LatticeMap,
    t: &LatticeMap,
) -> (
    FiniteGroup,
    Vec<usize>,
    Vec<Vec<usize>>,
    Vec<Vec<Vec<Cyclotomic>>>,
) {
    let _ = lat;
    let group = FiniteGroup::generate(
        &[("s".into(), s.clone()), ("t".into(), t.clone())],
        24,
    )
    .unwrap();
    let classes = group.conjugacy_classes();
    let mut rep_e = 0;
    let mut rep_s = 0;
    let mut rep_t = 0;
    for c in &classes {
        match group.element_order(c[0]) {
            1 => rep_e = c[0],
            2 => rep_s = c[0],
            3 => rep_t = c[0],
            _ => {}
        }
    }
    let cent_e: Vec<usize> = (0..group.order()).collect();
    let cent_s = group.centralizer(rep_s);
    let cent_t = group.centralizer(rep_t);
    let mut tab_e = vec![vec![Cyclotomic::one(); cent_e.len()]; 3];
    for (i, &g) in cent_e.iter().enumerate() {
        let o = group.element_order(g);
        tab_e[1][i] = if o == 2 { Cyclotomic::from_i64(-1) } else { Cyclotomic::one() };
        tab_e[2][i] = match o {
            1 => Cyclotomic::from_i64(2),
            2 => Cyclotomic::from_i64(0),
            _ => Cyclotomic::from_i64(-1),
        };
    }
    let proj_s = cyclic_projective_characters(2, 1);
    let mut tab_s = vec![vec![Cyclotomic::one(); cent_s.len()]; 2];
    for (i, &g) in cent_s.iter().enumerate() {
        let k = if g == rep_s { 1 } else { 0 };
        for l in 0..2 {
            tab_s[l][i] = proj_s[l][k].clone();
        }
    }
    let proj_t = cyclic_projective_characters(3, 2);
    let mut tab_t = vec![vec![Cyclotomic::one(); cent_t.len()]; 3];
    for (i, &g) in cent_t.iter().enumerate() {
        let mut k = 0;
        let mut cur = 0usize;
        for kk in 0..3 {
            if cur == g {
                k = kk;
                break;
            }
            cur = group.mult[cur][rep_t];
        }
        for l in 0..3 {
            tab_t[l][i] = proj_t[l][k].clone();
        }
    }
    (
        group,
        vec![rep_e, rep_s, rep_t],
        vec![cent_e, cent_s, cent_t],
        vec![tab_e, tab_s, tab_t],
    )
}

#[test]
fn st_matrices_trivial_group() {
    let id = LatticeMap::identity(8);
    let group = FiniteGroup::generate(&[("e".into(), id)], 4).unwrap();
    assert_eq!(group.order(), 1);
    let tables = vec![vec![vec![Cyclotomic::one()]]];
    let md = st_matrices(&group, &[0], &[vec![0]], &tables, &rat_int(8)).unwrap();
    assert_eq!(md.labels.len(), 1);
    assert!(md.s[0][0].eq(&Cyclotomic::one()));
    assert!(md.t[0].eq(&Cyclotomic::e2pi(&rat(-1, 3))));
}

#[test]
fn st_matrices_s3_unitary_and_numeric() {
    let model = standard::e8_model();
    let lat = &model.lattice;
    let s = &model.maps["s"];
    let t = &model.maps["t"];
    let (group, reps, cents, tables) = s3_group_and_tables(lat, s, t);
    let a_idx = (0..6).find(|&i| group.elems[i].matrix == t.matrix).unwrap();
    let big_a_idx = (0..6).find(|&i| group.elems[i].matrix == s.matrix).unwrap();
    let coc = SemidirectCocycle::new(&group, a_idx, big_a_idx, 3, 2, -1, 1, 2).unwrap();
    let cg = |g: usize, h1: usize, h2: usize| coc.descended(&group, g, h1, h2).unwrap();
    let md = st_matrices_with_cocycle(&group, &reps, &cents, &tables, &rat_int(8), Some(&cg))
        .unwrap();
    // S S† = Id exactly
    let n = md.labels.len();
    for i in 0..n {
        for j in 0..n {
            let mut acc = Cyclotomic::zero();
            for k in 0..n {
                acc = acc.add(&md.s[i][k].mul(&md.s[j][k].conj()));
            }
            let expect = if i == j { Cyclotomic::one() } else { Cyclotomic::zero() };
            assert!(acc.eq(&expect), "S S† broken at ({i},{j}): {acc:?}");
        }
    }
    // T diagonal entries are roots of unity
    for tv in &md.t {
        assert!(tv.as_root_of_unity().is_some());
    }
    // numeric S-transformation of the eight module characters at τ = i
    let order = rat_int(5);
    let (s_lift, t_lift) =
        orbifold_core::lifting::split_lift_semidirect(lat, s, t, -1, 3, 2).unwrap();
    let id = Lift::identity(8);
    let t_ee = twining_character(lat, &id, &id, &order).unwrap();
    let t_es = twining_character(lat, &id, &s_lift, &order).unwrap();
    let t_et = twining_character(lat, &id, &t_lift, &order).unwrap();
    let chi_e0 = t_ee
        .scale_rat(&rat(1, 6))
        .add(&t_es.scale_rat(&rat(3, 6)))
        .add(&t_et.scale_rat(&rat(2, 6)));
    let chi_esgn = t_ee
        .scale_rat(&rat(1, 6))
        .add(&t_es.scale_rat(&rat(-3, 6)))
        .add(&t_et.scale_rat(&rat(2, 6)));
    let chi_e2 = t_ee.scale_rat(&rat(2, 6)).add(&t_et.scale_rat(&rat(-2, 6)));
    let sec_s = SectorActions::cyclic_sector(lat, &s_lift, 2, 1, &order).unwrap();
    let chis_s = sec_s
        .module_characters(&cyclic_projective_characters(2, 1), &order)
        .unwrap();
    let sec_t = SectorActions::cyclic_sector(lat, &t_lift, 3, 2, &order).unwrap();
    let chis_t = sec_t
        .module_characters(&cyclic_projective_characters(3, 2), &order)
        .unwrap();
    let chars: Vec<&QSeries> = vec![
        &chi_e0, &chi_esgn, &chi_e2, &chis_s[0], &chis_s[1], &chis_t[0], &chis_t[1], &chis_t[2],
    ];
    let tau = (0.0, 1.0);
    let vals: Vec<(f64, f64)> = chars
        .iter()
        .map(|c| c.eval_at_tau(tau, 1e-6).unwrap())
        .collect();
    for (i, row) in md.s.iter().enumerate() {
        let mut rr = 0.0;
        let mut ri = 0.0;
        for (j, sij) in row.iter().enumerate() {
            let (sr, si) = sij.to_complex();
            let (vr, vi) = vals[j];
            rr += sr * vr - si * vi;
            ri += sr * vi + si * vr;
        }
        let d = ((rr - vals[i].0).powi(2) + (ri - vals[i].1).powi(2)).sqrt();
        let scale = (vals[i].0.powi(2) + vals[i].1.powi(2)).sqrt().max(1.0);
        assert!(d / scale < 1e-6, "numeric S-covariance row {i}: {d}");
    }
}

#[test]
fn abelian_bound_examples() {
    // trivial action, d = 8: level 2 achieves 8 + 36 = 44
    let exps: Vec<Vec<Rat>> = (0..8).map(|_| vec![rat_int(0)]).collect();
    let b = abelian_lower_bounds(&exps);
    assert_eq!(b.level2, 44);
    assert!(!b.attains2);

    // fixed-point-free element of even order 146 with squarefree spectrum:
    // all 72 primitive eigenvalues once; both bounds attained
    let n = 146i64;
    let mut exps: Vec<Vec<Rat>> = Vec::new();
    for k in 1..n {
        if num::integer::gcd(k, n) == 1 {
            exps.push(vec![rat(k, n)]);
        }
    }
    assert_eq!(exps.len(), 72);
    let b = abelian_lower_bounds(&exps);
    assert_eq!(b.level2, 36);
    assert!(b.attains2);
    assert_eq!(b.bound2, 36);
    assert_eq!(b.level3, 72);
    assert!(b.attains3);
    // the c = 72 corollary: a character with dim V_(2) = 12 < 36 cannot come
    // from such an orbifold
    assert!(12 < b.bound2);
}
