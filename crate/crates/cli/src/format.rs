use std::io::{self, Write};

/// `v` with 17 significant digits, in the style of C's `%.17g`.
pub fn g17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Comma-separated rows with a header and LF endings.
pub struct CsvWriter<W: Write> {
    out: W,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(4.834585253687429), "4.834585253687429");
        assert_eq!(g17(-45.738308415325882), "-45.738308415325882");
        assert_eq!(g17(1e-7), "9.9999999999999995e-8");
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(2.0), "2");
        assert_eq!(g17(1e16), "10000000000000000");
        assert_eq!(g17(1e-4), "0.0001");
        assert_eq!(g17(1e-5), "1.0000000000000001e-5");
    }

    #[test]
    fn round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            8.815987316591215,
            -1e-300,
            6.02e23,
            f64::MAX,
        ] {
            assert_eq!(g17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let mut w = CsvWriter::new(Vec::new(), &["a", "b"]).unwrap();
        w.row(&["1".into(), "x".into()]).unwrap();
        let out = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(out, "a,b\n1,x\n");
    }
}
