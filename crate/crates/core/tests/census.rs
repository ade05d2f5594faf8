use hmonoid::census::{self, Arith, CensusRequest, CensusValue, HfullRoute, Statistic, Subset};
use hmonoid::gaussian::Gaussian;
use hmonoid::graded::GradedInstance;
use hmonoid::integers::Integers;
use hmonoid::Monoid;

fn trial(n: u64) -> Vec<u32> {
    let mut v = Vec::new();
    let mut r = n;
    let mut d = 2;
    while d * d <= r {
        let mut e = 0;
        while r % d == 0 {
            r /= d;
            e += 1;
        }
        if e > 0 {
            v.push(e);
        }
        d += 1;
    }
    if r > 1 {
        v.push(1);
    }
    v
}

fn in_subset(s: Subset, e: &[u32]) -> bool {
    match s {
        Subset::All => true,
        Subset::HFree(h) => e.iter().all(|&x| x < h),
        Subset::HFull(h) => e.iter().all(|&x| x >= h),
        Subset::Neither(h) => e.iter().any(|&x| x < h) && e.iter().any(|&x| x >= h),
    }
}

// brute force value of a statistic over 1..=x
fn oracle(s: Subset, st: Statistic, x: u64) -> CensusValue {
    let (mut a, mut b) = (0u128, 0u128);
    for n in 1..=x {
        let e = trial(n);
        if !in_subset(s, &e) {
            continue;
        }
        let om = e.len() as u128;
        let big: u128 = e.iter().map(|&v| v as u128).sum();
        match st {
            Statistic::Count => a += 1,
            Statistic::Moment { of, k } => a += if of == Arith::Omega { om } else { big }.pow(k),
            Statistic::Violation { of, epsilon } => {
                if n < 3 {
                    continue;
                }
                let scale = match (s, of) {
                    (Subset::HFull(h), Arith::BigOmega) => h as f64,
                    _ => 1.0,
                };
                let l = scale * (n as f64).ln().ln();
                let f = if of == Arith::Omega { om } else { big } as f64;
                b += 1;
                if (f - l).abs() > epsilon * l {
                    a += 1;
                }
            }
        }
    }
    match st {
        Statistic::Violation { .. } => CensusValue::Fraction { num: a, den: b },
        _ => CensusValue::Integer(a),
    }
}

fn stats() -> Vec<Statistic> {
    let mut v = vec![Statistic::Count];
    for of in [Arith::Omega, Arith::BigOmega] {
        v.push(Statistic::Moment { of, k: 1 });
        v.push(Statistic::Moment { of, k: 2 });
        v.push(Statistic::Violation { of, epsilon: 0.5 });
    }
    v
}

#[test]
fn integers_match_brute_force() {
    let z = Integers::new();
    let cps = [1u64, 2, 30, 100, 777, 3000];
    for h in [2u32, 3, 4] {
        for s in [Subset::All, Subset::HFree(h), Subset::HFull(h), Subset::Neither(h)] {
            for st in stats() {
                for route in [HfullRoute::Tuples, HfullRoute::Filter] {
                    let req = CensusRequest::new(s, st, &cps).route(route).workers(3);
                    let res = census::run(&z, &req).unwrap();
                    for &(x, v) in &res.rows {
                        assert_eq!(v, oracle(s, st, x), "{s:?} {st:?} {route:?} x={x}");
                    }
                }
            }
        }
    }
}

#[test]
fn small_known_values() {
    let z = Integers::new();
    assert_eq!(census::count_subset(&z, Subset::HFree(2), &[], 100).unwrap(), 61);
    assert_eq!(census::count_subset(&z, Subset::HFull(2), &[], 100).unwrap(), 14);
    let two = census::primes_with_norms(&z, &[2]).unwrap();
    let odd = census::count_subset(&z, Subset::HFree(2), &two, 100).unwrap();
    let brute = (1..=100u64).filter(|n| n % 2 == 1 && trial(*n).iter().all(|&e| e == 1)).count();
    assert_eq!(odd, brute as u128);
    assert_eq!(odd, 41);
    let w = census::moment(&z, Subset::HFree(2), Arith::Omega, 1, 30).unwrap();
    let brute: usize = (1..=30u64)
        .map(trial)
        .filter(|e| e.iter().all(|&x| x == 1))
        .map(|e| e.len())
        .sum();
    assert_eq!(w, brute as u128);
    assert_eq!(w, 27);
}

#[test]
fn exclusions_match_brute_force() {
    let z = Integers::new();
    let ex = census::primes_with_norms(&z, &[2, 5]).unwrap();
    for s in [Subset::HFree(2), Subset::HFull(2), Subset::HFull(3)] {
        for route in [HfullRoute::Tuples, HfullRoute::Filter] {
            let req = CensusRequest::new(s, Statistic::Moment { of: Arith::Omega, k: 2 }, &[5000])
                .excluding(&ex)
                .route(route);
            let got = census::run(&z, &req).unwrap().last();
            let want: u128 = (1..=5000u64)
                .filter(|n| n % 2 != 0 && n % 5 != 0)
                .map(trial)
                .filter(|e| in_subset(s, e))
                .map(|e| (e.len() as u128).pow(2))
                .sum();
            assert_eq!(got, CensusValue::Integer(want), "{s:?} {route:?}");
            let req = CensusRequest::new(s, Statistic::Count, &[5000]).excluding(&ex).route(route);
            let cnt = census::run(&z, &req).unwrap().last().integer().unwrap();
            let want = (1..=5000u64)
                .filter(|n| n % 2 != 0 && n % 5 != 0)
                .filter(|&n| in_subset(s, &trial(n)))
                .count();
            assert_eq!(cnt, want as u128);
        }
    }
}

fn routes_agree(inst: &dyn Monoid, cps: &[u64]) {
    for h in [2u32, 3] {
        for st in stats() {
            let a = census::run(inst, &CensusRequest::new(Subset::HFull(h), st, cps)).unwrap();
            let b = census::run(
                inst,
                &CensusRequest::new(Subset::HFull(h), st, cps).route(HfullRoute::Filter).workers(4),
            )
            .unwrap();
            assert_eq!(a, b, "{} h={h} {st:?}", inst.name());
        }
    }
}

#[test]
fn hfull_routes_agree_on_other_instances() {
    routes_agree(&Gaussian, &[10, 1000, 20_000]);
    routes_agree(&GradedInstance::polynomial(2).unwrap(), &[0, 3, 8, 14]);
    routes_agree(&GradedInstance::polynomial(3).unwrap(), &[1, 6, 9]);
}

#[test]
fn subsets_partition_the_monoid() {
    let insts: Vec<(Box<dyn Monoid>, u64)> = vec![
        (Box::new(Integers::new()), 20_000),
        (Box::new(Gaussian), 20_000),
        (Box::new(GradedInstance::polynomial(2).unwrap()), 12),
    ];
    for (inst, x) in &insts {
        for h in [2, 3] {
            let c = |s| census::count_subset(inst.as_ref(), s, &[], *x).unwrap();
            let all = c(Subset::All);
            assert_eq!(all, inst.element_count(*x).unwrap());
            // the identity is both h-free and h-full
            assert_eq!(all + 1, c(Subset::HFree(h)) + c(Subset::HFull(h)) + c(Subset::Neither(h)));
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let z = Integers::new();
    let cps = [10_000u64, 100_000, 300_000];
    for st in stats() {
        let one = census::run(&z, &CensusRequest::new(Subset::HFree(2), st, &cps)).unwrap();
        for w in [2, 7] {
            let many = census::run(&z, &CensusRequest::new(Subset::HFree(2), st, &cps).workers(w)).unwrap();
            assert_eq!(one, many);
        }
    }
}

#[test]
fn rejects_bad_requests() {
    let z = Integers::new();
    assert!(census::run(&z, &CensusRequest::new(Subset::HFree(1), Statistic::Count, &[10])).is_err());
    assert!(census::run(&z, &CensusRequest::new(Subset::All, Statistic::Count, &[])).is_err());
    let st = Statistic::Moment { of: Arith::Omega, k: 3 };
    assert!(census::run(&z, &CensusRequest::new(Subset::All, st, &[10])).is_err());
    assert!(census::run(&z, &CensusRequest::new(Subset::All, Statistic::Count, &[10]).workers(0)).is_err());
    assert!(census::primes_with_norms(&z, &[4]).is_err());
}
