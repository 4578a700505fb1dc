//! Fixtures shared by the benchmarks.

use segdesc_core::analysis::Analyzer;
use segdesc_core::io::{bundled, ProblemDocument};
use segdesc_core::rational::int;
use segdesc_core::{
    canonicalize, order_variables, LabeledInequality, LinearExpr, Ordering, OrderingStrategy, OriginTag, RelOp,
    Relation, Variables,
};

pub fn sales_manager(name: &str) -> Analyzer {
    let doc = ProblemDocument::from_json(bundled(name).expect("bundled dataset")).expect("valid document");
    Analyzer::new(&doc.to_problem().expect("valid problem")).expect("model builds")
}

/// Dense system of `rows` inequalities over `vars` variables with small
/// integer coefficients, deterministic in `seed`.
pub fn dense_system(vars: usize, rows: usize, seed: u64) -> (Vec<LabeledInequality>, Ordering) {
    let names: Vec<String> = (1..=vars).map(|i| format!("x{i}")).collect();
    let variables = Variables::from_names(names.iter().map(String::as_str));
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = |m: i64| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as i64).rem_euclid(m)
    };
    let relations: Vec<Relation> = (0..rows)
        .map(|_| {
            let mut lhs = LinearExpr::zero();
            for v in variables.iter() {
                lhs.add_term(v, int(next(7) - 3));
            }
            Relation::new(lhs, RelOp::Le, LinearExpr::constant(int(next(13) + 1)), OriginTag::model())
        })
        .collect();
    let ineqs = canonicalize(&relations, &segdesc_core::rational::ratio(1, 100)).expect("positive epsilon");
    let ordering = order_variables(&ineqs, &variables, &OrderingStrategy::Frequency).expect("ordering");
    (ineqs, ordering)
}
