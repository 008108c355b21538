use super::{PhotonDistribution, ProbeParams, RabiTrace, TomographyError};
use std::io::{Read, Write};

impl PhotonDistribution {
    /// CSV with header `n,prob`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TomographyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "prob"])?;
        for (n, p) in self.probs().iter().enumerate() {
            w.write_record([n.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TomographyError> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut probs = Vec::new();
        for (k, rec) in r.deserialize::<(usize, f64)>().enumerate() {
            let (n, p) = rec?;
            if n != k {
                return Err(TomographyError::Format(format!("row {k} has n = {n}")));
            }
            probs.push(p);
        }
        Self::new(probs)
    }
}

impl RabiTrace {
    /// CSV with header `tau_ns,value`; the probe constants are not stored.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TomographyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau_ns", "value"])?;
        for (t, v) in self.taus().iter().zip(self.values()) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, probe: ProbeParams) -> Result<Self, TomographyError> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let (mut taus, mut values) = (Vec::new(), Vec::new());
        for rec in r.deserialize::<(f64, f64)>() {
            let (t, v) = rec?;
            taus.push(t);
            values.push(v);
        }
        Self::new(taus, values, probe)
    }
}
