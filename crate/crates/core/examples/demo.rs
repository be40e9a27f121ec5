//! End-to-end drive of the public library surface.

use subshift::attractor::{accident_renormalization_check, accidents, staircase_text};
use subshift::deep::DeepProfiler;
use subshift::language::LanguageIndex;
use subshift::tail::Tail;
use subshift::Substitution;

fn main() -> anyhow::Result<()> {
    let tm = Substitution::parse("0 -> 01 / 1 -> 10")?;
    let index = LanguageIndex::build(&tm, 48)?;
    println!(
        "language: {} letters, lambda {:.6}, two-full {}",
        tm.size(),
        index.lambda(),
        index.is_two_full()
    );
    println!("factors of length 4: {}", index.factors_sorted(4).len());

    let x = Tail::periodic(tm.parse_word("1")?);
    let acc = accidents(&index, &x, 12)?;
    println!("tail 1^inf: accident times {:?}", acc.times);

    let squared = x.image(&tm, 2, 1 << 20)?;
    let acc2 = accidents(&index, &squared, 12)?;
    println!(
        "H^2 tail: times {:?} depths {:?}",
        acc2.times, acc2.depths
    );
    let profile: Vec<usize> = {
        let digits = squared.digits(&tm, 12 + 50)?;
        subshift::attractor::delta_profile_over(&index, &digits.0, 8)?
    };
    print!("{}", staircase_text(&profile));

    let mut deep = DeepProfiler::new(&index)?;
    let report = accident_renormalization_check(&index, &x, Some(1), 6, 3, &mut deep)?;
    println!(
        "renormalization n=6: hypotheses {}, image times {:?}, depths {:?}, residuals {:?}",
        report.hypotheses_met, report.image.times, report.image.depths, report.time_residuals
    );
    println!(
        "witness match {} exact-law residual max {:?}",
        report.witnesses_match, report.max_relative_residual
    );

    let mut deep2 = DeepProfiler::new(&index)?;
    let lim = subshift::renorm::limit_u(&index, &x, 3, &mut deep2)?;
    println!(
        "limit U: value {:.9} converged {} (closed form {:.9})",
        lim.value,
        lim.converged,
        subshift::renorm::thue_morse_u(2)?
    );

    let cyl = subshift::thermo::CylinderJ::new(&index, "111", 8, 3)?;
    let cert = subshift::thermo::freezing_certificate(&index, &cyl, 50.0, 12, 12)?;
    println!(
        "freeze beta=50: outcome {:?}, q {:.4e}, operator {:.4e}, tail bound {:.4e}",
        cert.outcome, cert.q, cert.operator_value, cert.tail_bound
    );

    // Probe: malformed input and unsupported structure must fail cleanly.
    match Substitution::parse("0 -> / 1 -> 0") {
        Err(e) => println!("probe malformed parse: error as expected: {e}"),
        Ok(_) => println!("probe malformed parse: UNEXPECTED success"),
    }
    let fib = subshift::examples::fibonacci();
    let fib_index = LanguageIndex::build(&fib, 32)?;
    match DeepProfiler::new(&fib_index) {
        Err(e) => println!("probe unmarked deep profiler: error as expected: {e}"),
        Ok(_) => println!("probe unmarked deep profiler: UNEXPECTED success"),
    }
    Ok(())
}
