use std::io::{self, ErrorKind, StdoutLock, Write};

use primewin::Result;

/// Line-oriented standard output that stops quietly once the reader hangs up,
/// as with `primewin search ... | head`.
pub struct Out {
    inner: StdoutLock<'static>,
    closed: bool,
}

impl Out {
    pub fn new() -> Self {
        Out {
            inner: io::stdout().lock(),
            closed: false,
        }
    }

    /// Writes and flushes one line; `Ok(false)` once the pipe is closed.
    pub fn line(&mut self, text: &str) -> Result<bool> {
        if self.closed {
            return Ok(false);
        }
        match writeln!(self.inner, "{text}").and_then(|_| self.inner.flush()) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == ErrorKind::BrokenPipe => {
                self.closed = true;
                Ok(false)
            }
            Err(e) => Err(e.into()),
        }
    }
}
