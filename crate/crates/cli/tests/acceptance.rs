//! Acceptance run: checks 1–11 at full budget, then the quick suite through
//! the binary with its time limit.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ginibrenet_core::validation::{run_suite, Budget, SUITE_SEED};

const QUICK_LIMIT: Duration = Duration::from_secs(5 * 60);
const FULL_LIMIT: Duration = Duration::from_secs(45 * 60);

fn main() -> ExitCode {
    let start = Instant::now();
    let results = run_suite(&Budget::full(), SUITE_SEED, |r| println!("criterion {}", r.line()));
    let full_elapsed = start.elapsed();

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_ginibrenet"))
        .args(["validate", "--quick"])
        .output()
        .expect("run ginibrenet");
    let quick_elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let quick_ok = out.status.success() && quick_elapsed <= QUICK_LIMIT && full_elapsed <= FULL_LIMIT;
    println!(
        "criterion [{}] 12 end-to-end: observed validate --quick exit {:?} in {:.1}s, full suite in {:.1}s; \
         required exit 0 within {}s and full suite within {}s",
        if quick_ok { "PASS" } else { "FAIL" },
        out.status.code(),
        quick_elapsed.as_secs_f64(),
        full_elapsed.as_secs_f64(),
        QUICK_LIMIT.as_secs(),
        FULL_LIMIT.as_secs()
    );

    let failed = results.iter().filter(|r| !r.passed).count() + usize::from(!quick_ok);
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        if !quick_ok {
            println!("validate --quick output:\n{stdout}");
        }
        ExitCode::FAILURE
    }
}
