//! CSV output with a stable numeric format.
//!
//! Floats are written with 6 significant digits, fixed notation for
//! moderate magnitudes and scientific otherwise, trailing zeros trimmed.
//! The format is deterministic, so rerunning a sweep reproduces the file
//! byte for byte, and a reparse recovers every value to the same 6 digits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use airelm_core::{Error, Result};

use crate::runner::ExperimentRecord;

/// Column names, in the order fields are declared on the record.
pub const HEADER: [&str; 13] = [
    "dataset",
    "variant",
    "n_r",
    "ricean_k",
    "snr_db",
    "seed",
    "train_accuracy",
    "test_accuracy",
    "train_ls_error",
    "pgd_final_objective",
    "pgd_iters",
    "wallclock_ms",
    "error",
];

/// Formats a float with 6 significant digits.
///
/// Magnitudes in [1e-4, 1e6) use fixed notation, everything else uses
/// scientific; trailing zeros and a dangling decimal point are trimmed.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exponent) = s.split_once('e').expect("{:e} always emits an exponent");
        format!("{}e{}", trim_fraction(mantissa.to_string()), exponent)
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn record_fields(r: &ExperimentRecord) -> [String; 13] {
    [
        r.dataset.clone(),
        r.variant.clone(),
        r.n_r.to_string(),
        r.ricean_k.map_or_else(|| "rayleigh".to_string(), fmt6),
        fmt6(r.snr_db),
        r.seed.to_string(),
        fmt6(r.train_accuracy),
        fmt6(r.test_accuracy),
        fmt6(r.train_ls_error),
        fmt6(r.pgd_final_objective),
        r.pgd_iters.to_string(),
        r.wallclock_ms.to_string(),
        r.error.clone(),
    ]
}

/// Writes header and records to any sink, LF line endings.
pub fn write_csv_to<W: Write>(sink: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let fail = |e: csv::Error| Error::Format(format!("csv write: {e}"));
    writer.write_record(HEADER).map_err(fail)?;
    for record in records {
        writer.write_record(record_fields(record)).map_err(fail)?;
    }
    writer.flush().map_err(|e| Error::Format(format!("csv write: {e}")))?;
    Ok(())
}

/// Writes records to a file, creating or truncating it.
pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file =
        File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_csv_to(file, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> ExperimentRecord {
        ExperimentRecord {
            dataset: "wbcd".into(),
            variant: "ideal".into(),
            n_r: 64,
            ricean_k: None,
            snr_db: 15.0,
            seed: 3,
            train_accuracy: 0.914923,
            test_accuracy: 0.87719298,
            train_ls_error: 3.947215e-8,
            pgd_final_objective: 0.0,
            pgd_iters: 0,
            wallclock_ms: 0,
            error: String::new(),
        }
    }

    #[test]
    fn fmt6_covers_both_notations() {
        assert_eq!(fmt6(0.0), "0");
        assert_eq!(fmt6(-0.0), "0");
        assert_eq!(fmt6(15.0), "15");
        assert_eq!(fmt6(-2.5), "-2.5");
        assert_eq!(fmt6(0.914923), "0.914923");
        assert_eq!(fmt6(0.87719298), "0.877193");
        assert_eq!(fmt6(123456.7), "123457");
        assert_eq!(fmt6(0.000123456), "0.000123456");
        assert_eq!(fmt6(3.947212e-8), "3.94721e-8");
        assert_eq!(fmt6(1e-7), "1e-7");
        assert_eq!(fmt6(2.5e9), "2.5e9");
        assert_eq!(fmt6(9.999991e-5), "9.99999e-5");
    }

    #[test]
    fn fmt6_round_trips_through_parse() {
        let values = [
            0.914923, 15.0, 1e-7, 3.947215e-8, 123456.7, 0.3, 1.0 / 3.0, 2.5e9, -0.0481,
        ];
        for v in values {
            let s = fmt6(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(fmt6(back), s, "value {v}");
        }
    }

    #[test]
    fn empty_record_list_writes_header_only() {
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, format!("{}\n", HEADER.join(",")));
    }

    #[test]
    fn one_record_writes_two_lines() {
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &[sample_record()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        let row = text.lines().nth(1).unwrap();
        assert_eq!(
            row,
            "wbcd,ideal,64,rayleigh,15,3,0.914923,0.877193,3.94721e-8,0,0,0,"
        );
    }

    #[test]
    fn ricean_column_shows_the_factor_when_present() {
        let mut record = sample_record();
        record.ricean_k = Some(100.0);
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &[record]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",100,"));
    }

    #[test]
    fn reparse_recovers_values_to_six_digits() {
        let records = vec![sample_record()];
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &records).unwrap();
        let mut reader = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(
            reader.headers().unwrap().iter().collect::<Vec<_>>(),
            HEADER.to_vec()
        );
        let row = reader.records().next().unwrap().unwrap();
        let acc: f64 = row[6].parse().unwrap();
        let err: f64 = row[8].parse().unwrap();
        assert_eq!(fmt6(acc), fmt6(records[0].train_accuracy));
        assert_eq!(fmt6(err), fmt6(records[0].train_ls_error));
    }
}
