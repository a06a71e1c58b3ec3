//! Acceptance suite: one line per criterion, exit status 1 if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use cardproto::analyzer::{
    action_distribution, build_report, count_resources, fragment_distribution, kwh_posteriors,
    precut_rotation_classes, verify_correctness, verify_security, Options, PosteriorTable, Prior,
};
use cardproto::deck::Permutation;
use cardproto::protocol::{
    add_mod_k, doubly_symmetric, equality_first, equality_first_sabotaged, equality_second,
    five_card_trick, k_candidate_equality, mizuki_sone_sandwich, six_card_trick,
    symmetric_plus_two, Protocol, Sabotage,
};
use cardproto::script::load;
use cardproto::shuffle::{random_bit_xor, ShuffleAction, ShuffleKind};
use cardproto::Prob;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

type Oracle = Box<dyn Fn(&[u32]) -> i64>;

fn ceil_lg(k: usize) -> usize {
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

fn majority(n: usize) -> Vec<i64> {
    (0..=n).map(|s| (2 * s > n) as i64).collect()
}

fn equality_table(n: usize) -> Vec<i64> {
    (0..=n).map(|s| (s == 0 || s == n) as i64).collect()
}

fn parity_table(n: usize) -> Vec<i64> {
    (0..=n).map(|s| (s % 2) as i64).collect()
}

/// Every protocol in the correctness/security list, with an oracle written
/// directly from its definition.
fn catalogue() -> Vec<(Protocol, Oracle)> {
    let all_equal: fn(&[u32]) -> i64 = |x| x.iter().all(|&v| v == x[0]) as i64;
    let weight = |x: &[u32]| x.iter().sum::<u32>() as usize;
    let mut out: Vec<(Protocol, Oracle)> = vec![
        (
            five_card_trick().unwrap(),
            Box::new(|x| (x[0] & x[1]) as i64),
        ),
        (six_card_trick().unwrap(), Box::new(all_equal)),
    ];
    for n in 2..=6 {
        out.push((equality_first(n).unwrap(), Box::new(all_equal)));
    }
    for n in 2..=8 {
        out.push((equality_second(n).unwrap(), Box::new(all_equal)));
    }
    for n in [3, 5] {
        out.push((
            symmetric_plus_two(n, &majority(n)).unwrap(),
            Box::new(move |x| (2 * weight(x) > n) as i64),
        ));
    }
    for n in 2..=5 {
        out.push((
            doubly_symmetric(n, &equality_table(n)).unwrap(),
            Box::new(all_equal),
        ));
    }
    out.push((
        doubly_symmetric(4, &parity_table(4)).unwrap(),
        Box::new(|x| x.iter().fold(0, |a, &b| a ^ b) as i64),
    ));
    for (n, k) in [(2, 3), (3, 4), (4, 5)] {
        out.push((k_candidate_equality(n, k).unwrap(), Box::new(all_equal)));
    }
    out
}

fn label(p: &Protocol) -> String {
    let params: Vec<String> = p.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}({})", p.name(), params.join(","))
}

fn criterion_1(cat: &[(Protocol, Oracle)]) -> Check {
    let opts = Options::default();
    let mut paths = 0u64;
    for (p, oracle) in cat {
        let inputs = p.domain().inputs();
        for x in &inputs {
            ensure!(
                p.spec().eval(x) == oracle(x),
                "{}: declared function disagrees with oracle on {x:?}",
                label(p)
            );
        }
        let r = verify_correctness(p, p.spec(), &opts).map_err(|e| e.to_string())?;
        ensure!(r.pass, "{}: {:?}", label(p), r.counterexamples.first());
        ensure!(
            r.inputs == inputs.len(),
            "{}: not every input enumerated",
            label(p)
        );
        paths += r.paths as u64;
    }
    let tricks = [cat[0].0.domain().size(), cat[1].0.domain().size()];
    ensure!(tricks == [4, 8], "trick input counts {tricks:?}");
    Ok(format!(
        "{} protocols, {paths} paths, all outputs equal f(x)",
        cat.len()
    ))
}

fn criterion_2(cat: &[(Protocol, Oracle)]) -> Check {
    let opts = Options::default();
    let mut comparisons = 0;
    for (p, _) in cat {
        let r = verify_security(p, &opts).map_err(|e| e.to_string())?;
        ensure!(r.pass, "{}: {:?}", label(p), r.violations.first());
        comparisons += r.comparisons;
    }
    let mut shown = Vec::new();
    for s in [Sabotage::NoFinalCut, Sabotage::EarlyReveal] {
        for n in 3..=5 {
            let p = equality_first_sabotaged(n, s).unwrap();
            let r = verify_security(&p, &opts).map_err(|e| e.to_string())?;
            ensure!(!r.pass, "{} n={n} reported secure", p.name());
            let v = &r.violations[0];
            ensure!(
                v.probabilities[0] != v.probabilities[1] && !v.trace.is_empty(),
                "{}: violation without a distinguishing trace",
                p.name()
            );
            ensure!(
                v.output.is_none() || p.spec().eval(&v.inputs[0]) == p.spec().eval(&v.inputs[1]),
                "{}: violation compares inputs with different outputs",
                p.name()
            );
            if n == 3 {
                shown.push(format!(
                    "{}: {:?} vs {:?} on \"{}\" ({} vs {})",
                    p.name(),
                    v.inputs[0],
                    v.inputs[1],
                    v.trace,
                    v.probabilities[0],
                    v.probabilities[1]
                ));
            }
        }
    }
    Ok(format!(
        "{comparisons} exact comparisons pass; sabotage caught: {}",
        shown.join("; ")
    ))
}

/// Uniform plus three point masses at the first, middle and last input.
fn priors(p: &Protocol) -> Vec<Prior> {
    let d = *p.domain();
    let inputs = d.inputs();
    let mut out = vec![Prior::uniform(d)];
    for i in [0, inputs.len() / 2, inputs.len() - 1] {
        out.push(Prior::point(d, &inputs[i]).unwrap());
    }
    out
}

fn marginal(entries: impl Iterator<Item = (Vec<u32>, Prob)>, coord: usize) -> BTreeMap<u32, Prob> {
    let mut m: BTreeMap<u32, Prob> = BTreeMap::new();
    for (x, w) in entries {
        if w != Prob::zero() {
            *m.entry(x[coord]).or_insert_with(Prob::zero) += w;
        }
    }
    m
}

fn prior_marginal(p: &Protocol, prior: &Prior, coord: usize) -> BTreeMap<u32, Prob> {
    marginal(
        p.domain().inputs().into_iter().map(|x| {
            let w = prior.weight(&x).clone();
            (x, w)
        }),
        coord,
    )
}

fn posterior_marginals_match(
    p: &Protocol,
    table: &PosteriorTable,
    prior: &Prior,
    coord: usize,
) -> Check {
    let expected = prior_marginal(p, prior, coord);
    ensure!(!table.rows.is_empty(), "{}: no traces", label(p));
    for row in &table.rows {
        let got = marginal(
            row.posterior
                .iter()
                .map(|e| (e.input.clone(), e.probability.clone())),
            coord,
        );
        ensure!(
            got == expected,
            "{} prior {prior}: after \"{}\" marginal {got:?} != {expected:?}",
            label(p),
            row.trace
        );
    }
    Ok(String::new())
}

fn criterion_3() -> Check {
    let opts = Options::default();
    let mut tables = 0;
    // Revealing Y after the shift: Pr(b = i | V) = Pr(b = i).
    for k in 2..=5 {
        let p = add_mod_k(k).unwrap();
        for prior in priors(&p) {
            let t = kwh_posteriors(&p, &prior, Some(1), &opts).map_err(|e| e.to_string())?;
            ensure!(
                t.rows.len() == k,
                "add k={k}: {} traces, want {k}",
                t.rows.len()
            );
            posterior_marginals_match(&p, &t, &prior, 1)?;
            tables += 1;
        }
    }
    // Revealing a_n xor r: Pr(a_n = i | V) = Pr(a_n = i).
    for n in 2..=5 {
        let p = equality_first(n).unwrap();
        for prior in priors(&p) {
            let t = kwh_posteriors(&p, &prior, Some(1), &opts).map_err(|e| e.to_string())?;
            posterior_marginals_match(&p, &t, &prior, n - 1)?;
            tables += 1;
        }
    }
    // After the final cuts: posterior is the prior conditioned on f(x) = b'.
    let mut finals = vec![];
    for n in 2..=5 {
        finals.push(equality_first(n).unwrap());
        finals.push(doubly_symmetric(n, &equality_table(n)).unwrap());
    }
    finals.push(doubly_symmetric(5, &[0, 1, 1, 1, 1, 0]).unwrap());
    finals.push(doubly_symmetric(4, &parity_table(4)).unwrap());
    for p in &finals {
        for prior in priors(p) {
            let t = kwh_posteriors(p, &prior, None, &opts).map_err(|e| e.to_string())?;
            for row in &t.rows {
                let outputs: BTreeSet<i64> = row
                    .posterior
                    .iter()
                    .map(|e| p.spec().eval(&e.input))
                    .collect();
                ensure!(outputs.len() == 1, "{}: trace leaves output open", label(p));
                let b = *outputs.iter().next().unwrap();
                let inside: Vec<Vec<u32>> = p
                    .domain()
                    .inputs()
                    .into_iter()
                    .filter(|x| p.spec().eval(x) == b)
                    .collect();
                let mass: Prob = inside.iter().map(|x| prior.weight(x).clone()).sum();
                let expected: BTreeMap<Vec<u32>, Prob> = inside
                    .iter()
                    .filter(|x| *prior.weight(x) != Prob::zero())
                    .map(|x| (x.clone(), prior.weight(x).clone() / mass.clone()))
                    .collect();
                let got: BTreeMap<Vec<u32>, Prob> = row
                    .posterior
                    .iter()
                    .map(|e| (e.input.clone(), e.probability.clone()))
                    .collect();
                ensure!(
                    got == expected,
                    "{} prior {prior}: after \"{}\" posterior differs",
                    label(p),
                    row.trace
                );
            }
            tables += 1;
        }
    }
    Ok(format!(
        "{tables} posterior tables equal the prior (or prior given f) exactly"
    ))
}

/// `P_b` sizes for a table over sums, counting values with several preimages.
fn multi_preimage_values(table: &[i64]) -> usize {
    let mut sizes: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in table {
        *sizes.entry(v).or_default() += 1;
    }
    sizes.values().filter(|&&s| s > 1).count()
}

fn image_size(table: &[i64]) -> usize {
    table.iter().collect::<BTreeSet<_>>().len()
}

fn criterion_4() -> Check {
    let rc = |p: &Protocol| {
        let r = count_resources(p).unwrap();
        assert!(r.uniform, "{} shuffle count varies by path", label(p));
        (r.cards, r.shuffles)
    };
    for n in 2..=6 {
        let got = rc(&equality_first(n).unwrap());
        ensure!(got == (2 * n, n), "equality_first n={n}: {got:?}");
    }
    for n in 2..=8 {
        let got = rc(&equality_second(n).unwrap());
        ensure!(got == (2 * n, n - 1), "equality_second n={n}: {got:?}");
    }
    for (n, k) in [(2, 3), (3, 4), (4, 5), (2, 2), (3, 8)] {
        let l = ceil_lg(k);
        let got = rc(&k_candidate_equality(n, k).unwrap());
        ensure!(got == (2 * l * n, l * n - 1), "kcand n={n} k={k}: {got:?}");
    }
    let mut notes = Vec::new();
    for (n, g) in [
        (3, majority(3)),
        (5, majority(5)),
        (4, vec![0, 1, 2, 1, 0]),
        (4, parity_table(4)),
    ] {
        let (cards, shuffles) = rc(&symmetric_plus_two(n, &g).unwrap());
        let bound = n - 1 + image_size(&g);
        ensure!(cards == 2 * n + 2, "symmetric n={n}: {cards} cards");
        ensure!(
            shuffles <= bound,
            "symmetric n={n} g={g:?}: {shuffles} > {bound}"
        );
        let derived = (n - 1) + multi_preimage_values(&g);
        ensure!(
            shuffles == derived,
            "symmetric n={n} g={g:?}: {shuffles} != {derived}"
        );
        notes.push(format!("sym n={n}: {shuffles}<={bound}"));
    }
    for (n, g) in [
        (3, equality_table(3)),
        (4, equality_table(4)),
        (4, parity_table(4)),
        (5, equality_table(5)),
        (5, vec![0, 1, 1, 1, 1, 0]),
    ] {
        let (cards, shuffles) = rc(&doubly_symmetric(n, &g).unwrap());
        // the protocol works on s in 0..n
        let bound = n - 1 + image_size(&g);
        let derived = 1 + (n - 2) + multi_preimage_values(&g[..n]);
        ensure!(cards == 2 * n, "doubly_symmetric n={n}: {cards} cards");
        ensure!(
            shuffles == derived && shuffles <= bound,
            "doubly_symmetric n={n} g={g:?}: {shuffles} (derived {derived}, bound {bound})"
        );
        let table_value = n + 1 + image_size(&g);
        ensure!(
            shuffles < table_value,
            "doubly_symmetric n={n}: count reaches n+1+|Im f|"
        );
        notes.push(format!("dsym n={n}: {shuffles}<={bound}"));
    }
    Ok(format!(
        "(2n,n), (2n,n-1), (2Ln,Ln-1) exact; {}; n+1+|Im f| documented as unreconciled",
        notes.join(", ")
    ))
}

fn criterion_5() -> Check {
    let five = precut_rotation_classes(&five_card_trick().unwrap()).map_err(|e| e.to_string())?;
    let six = precut_rotation_classes(&six_card_trick().unwrap()).map_err(|e| e.to_string())?;
    ensure!(five.len() == 2, "five-card trick classes {five:?}");
    ensure!(six.len() == 2, "six-card trick classes {six:?}");
    Ok(format!("five-card {five:?}, six-card {six:?}"))
}

fn reference_shuffle(len: usize, cycles: &[&str]) -> ShuffleAction {
    let perms = cycles
        .iter()
        .map(|c| Permutation::parse(c, len).unwrap())
        .collect();
    ShuffleAction::new(ShuffleKind::Shuffle, perms).unwrap()
}

fn criterion_6() -> Check {
    for k in 1..=4 {
        let swap: String = (0..k)
            .map(|i| format!("({} {})", 2 * i + 1, 2 * i + 2))
            .collect();
        let lhs =
            fragment_distribution(&random_bit_xor(k).unwrap(), 2 * k).map_err(|e| e.to_string())?;
        let rhs = action_distribution(&reference_shuffle(2 * k, &["id", &swap]));
        ensure!(lhs == rhs, "random bit XOR k={k}: {lhs:?} vs {rhs:?}");
    }
    let lhs = fragment_distribution(&mizuki_sone_sandwich(), 6).map_err(|e| e.to_string())?;
    let rhs = action_distribution(&reference_shuffle(6, &["id", "(1 2)(3 5)(4 6)"]));
    ensure!(lhs == rhs, "sandwich: {lhs:?} vs {rhs:?}");
    Ok("random bit XOR (k=1..4) and the AND sandwich match their two-outcome shuffles".into())
}

fn criterion_7() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scripts");
    let opts = Options::default();
    let pairs = [
        ("five_card_trick.cardp", five_card_trick().unwrap()),
        ("equality_second_3.cardp", equality_second(3).unwrap()),
    ];
    for (file, builtin) in &pairs {
        let text = std::fs::read_to_string(dir.join(file)).map_err(|e| e.to_string())?;
        let p = load(&text).map_err(|d| format!("{file}: {d:?}"))?;
        let a = build_report(&p, &opts, None)
            .map_err(|e| e.to_string())?
            .to_json();
        let b = build_report(builtin, &opts, None)
            .map_err(|e| e.to_string())?
            .to_json();
        ensure!(a == b, "{file}: report differs from the built-in");
    }
    Ok("both reference scripts give byte-identical reports".into())
}

fn criterion_8() -> Check {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_cardproto"))
            .args(["verify", "equality_first", "--n", "5", "--format", "json"])
            .env("CARDPROTO_THREADS", threads)
            .output()
            .expect("run cardproto");
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let outputs: Vec<Vec<u8>> = ["1", "4", "1", "4"].iter().map(|t| run(t)).collect();
    ensure!(
        outputs.windows(2).all(|w| w[0] == w[1]),
        "verify output differs between runs"
    );
    Ok(format!(
        "4 runs (1 and 4 workers) byte-identical, {} bytes",
        outputs[0].len()
    ))
}

fn main() {
    let started = Instant::now();
    let cat = catalogue();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        (
            "correctness with probability 1",
            Box::new(|| criterion_1(&cat)),
        ),
        (
            "exact security, sabotage detected",
            Box::new(|| criterion_2(&cat)),
        ),
        (
            "posteriors after reveals and final cuts",
            Box::new(criterion_3),
        ),
        ("resource counts", Box::new(criterion_4)),
        ("pre-cut rotation classes", Box::new(criterion_5)),
        ("gadget equivalences", Box::new(criterion_6)),
        ("script round-trip", Box::new(criterion_7)),
        ("determinism across worker counts", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1}s) - {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s) - {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
