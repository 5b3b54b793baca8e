//! Runs every acceptance criterion, prints one line each and exits non-zero
//! when any of them fails.

fn main() {
    let mut failed = Vec::new();
    for (n, check) in dtd_eval::CRITERIA {
        let o = check();
        println!(
            "criterion {n:>2}: {} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
