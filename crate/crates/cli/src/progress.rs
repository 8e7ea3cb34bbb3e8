use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

const REPORT_EVERY: Duration = Duration::from_secs(2);

/// Rate-limited progress lines on standard error.
pub struct Reporter {
    quiet: bool,
    started: Instant,
    last: Instant,
    first_n: u64,
}

impl Reporter {
    pub fn new(quiet: bool, first_n: u64) -> Self {
        let now = Instant::now();
        Reporter {
            quiet,
            started: now,
            last: now,
            first_n,
        }
    }

    pub fn report(&mut self, scanned_through: u64, hits: usize, what: &str) {
        if self.quiet || self.last.elapsed() < REPORT_EVERY {
            return;
        }
        self.last = Instant::now();
        let secs = self.started.elapsed().as_secs_f64().max(1e-9);
        let done = scanned_through.saturating_sub(self.first_n.saturating_sub(1));
        eprintln!(
            "scanned through n = {scanned_through} ({:.0} indices/s), {hits} {what}",
            done as f64 / secs
        );
    }
}

/// Flag raised by Ctrl-C.
pub fn interrupt_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let f = flag.clone();
    let _ = ctrlc::set_handler(move || f.store(true, Ordering::Relaxed));
    flag
}

pub fn deadline(time_limit: Option<f64>) -> Option<Instant> {
    time_limit.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)))
}
