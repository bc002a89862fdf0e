//! CSV datasets: one header line naming the columns, then one numeric row per sample.
//!
//! Planner data has the columns `py,vx,vy,gap_lead,v_xl,gap_follow,v_xf,ax,ay`;
//! assessor data `vx,gap_lead,v_xl,gap_follow,v_xf,a1,a0`.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::Context;
use safin_core::mlp::Dataset;

use crate::format::{csv_error, parse_f64, FormatError};

pub fn write_dataset<W: Write>(out: W, columns: &[&str], data: &Dataset) -> anyhow::Result<()> {
    anyhow::ensure!(columns.len() == data.inputs + data.outputs, "{} column names for {} columns", columns.len(), data.inputs + data.outputs);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    let mut row: Vec<String> = Vec::with_capacity(columns.len());
    for i in 0..data.len() {
        let (x, y) = data.row(i);
        row.clear();
        row.extend(x.iter().chain(y).map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a dataset whose header must equal `columns`; the last `outputs` columns are targets.
pub fn read_dataset<R: Read>(input: R, columns: &[&str], outputs: usize) -> Result<Dataset, FormatError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().map(str::trim).ne(columns.iter().copied()) {
        return Err(FormatError::new(1, format!("header must be `{}`, found `{}`", columns.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let inputs = columns.len() - outputs;
    let mut data = Dataset::new(inputs, outputs);
    let mut vals = vec![0.0; columns.len()];
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        for (j, (v, name)) in vals.iter_mut().zip(columns).enumerate() {
            *v = parse_f64(rec.get(j).unwrap_or(""), line, name)?;
        }
        data.push(&vals[..inputs], &vals[inputs..]);
    }
    if data.is_empty() {
        return Err(FormatError::new(1, "dataset has no rows"));
    }
    Ok(data)
}

pub fn save_dataset(path: &Path, columns: &[&str], data: &Dataset) -> anyhow::Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_dataset(std::io::BufWriter::new(f), columns, data)
}

pub fn load_dataset(path: &Path, columns: &[&str], outputs: usize) -> anyhow::Result<Dataset> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_dataset(std::io::BufReader::new(f), columns, outputs).with_context(|| format!("dataset {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const COLS: [&str; 3] = ["a", "b", "y"];

    #[test]
    fn roundtrip() {
        let mut d = Dataset::new(2, 1);
        d.push(&[0.1, -3.0], &[1e-17]);
        d.push(&[2.5, 7.0], &[-0.0]);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &COLS, &d).unwrap();
        assert!(buf.starts_with(b"a,b,y\n"));
        assert_eq!(read_dataset(&buf[..], &COLS, 1).unwrap(), d);
    }

    #[test]
    fn bad_cell_is_located() {
        let err = read_dataset("a,b,y\n1,2,3\n4,oops,6\n".as_bytes(), &COLS, 1).unwrap_err();
        assert_eq!((err.line, err.field.as_deref()), (3, Some("b")));
        let err = read_dataset("a,b,y\n1,2,3\n4,5\n".as_bytes(), &COLS, 1).unwrap_err();
        assert_eq!(err.line, 3);
        let err = read_dataset("a,c,y\n1,2,3\n".as_bytes(), &COLS, 1).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(read_dataset("a,b,y\n".as_bytes(), &COLS, 1).is_err());
        let err = read_dataset("a,b,y\n1,inf,3\n".as_bytes(), &COLS, 1).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("b"));
    }
}
