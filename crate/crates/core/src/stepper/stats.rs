//! CSV statistics stream: `t, flux, beta, e_kin`.

use crate::error::Result;
use std::io::Write;

pub struct StatsWriter<W: Write> {
    out: W,
}

impl<W: Write> StatsWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "t,flux,beta,e_kin")?;
        Ok(StatsWriter { out })
    }

    pub fn record(&mut self, t: f64, flux: f64, beta: f64, e_kin: f64) -> Result<()> {
        writeln!(self.out, "{t:.10e},{flux:.15e},{beta:.15e},{e_kin:.15e}")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
