//! Acceptance criteria 1-10. Prints one line per criterion and exits
//! nonzero if any fails.

use std::time::{Duration, Instant};

use telegraph::verify::{criterion_checks, Check};

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Option<Duration>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "contraction and semigroup law", budget: Some(Duration::from_secs(5)) },
    Criterion { id: 2, title: "energy identity", budget: None },
    Criterion { id: 3, title: "resolvent bound and round trip", budget: None },
    Criterion { id: 4, title: "propagator vs high-order integration, Abel identity", budget: None },
    Criterion { id: 5, title: "weighted decay and omega refinement", budget: None },
    Criterion { id: 6, title: "n-widths", budget: None },
    Criterion { id: 7, title: "ball invariance on [0, T0]", budget: None },
    Criterion { id: 8, title: "fixed point, weak residual, FD cross-check", budget: Some(Duration::from_secs(120)) },
    Criterion { id: 9, title: "constraint certification and crossing detection", budget: None },
    Criterion { id: 10, title: "weak-residual tail under n doubling", budget: None },
];

fn render(c: &Check) -> String {
    let mark = if c.passed { "" } else { "!" };
    format!("{mark}{}={:.3e}/{:e}", c.name, c.measured, c.threshold)
}

fn main() {
    let seed = 1;
    let mut failures = 0;
    for crit in &CRITERIA {
        let start = Instant::now();
        let checks = criterion_checks(crit.id, seed);
        let elapsed = start.elapsed();
        let in_budget = crit.budget.is_none_or(|b| elapsed <= b);
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed) && in_budget;
        if !passed {
            failures += 1;
        }
        let details: Vec<String> = checks.iter().map(render).collect();
        let budget = crit.budget.map_or(String::new(), |b| format!(" budget {}s", b.as_secs()));
        println!(
            "criterion {:>2} {} {} [{:.2}s{budget}] {}",
            crit.id,
            if passed { "PASS" } else { "FAIL" },
            crit.title,
            elapsed.as_secs_f64(),
            details.join(" ")
        );
        for c in checks.iter().filter(|c| !c.passed) {
            if let Some(w) = &c.counterexample {
                println!("    counterexample for {}: {w}", c.name);
            }
        }
    }
    if failures > 0 {
        println!("acceptance: {failures} of {} criteria failed", CRITERIA.len());
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", CRITERIA.len());
}
