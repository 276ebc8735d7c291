//! CSV input and report formats.
//!
//! All floating-point output is printed with 17 significant digits so that
//! every number round-trips to the exact f64 the library produced. Report
//! writers echo seeds and configuration as `#` comment lines; the posterior
//! reader accepts (and skips) such comments.

use vbq_core::quantizer::RdPoint;
use vbq_core::GaussianPosterior;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsvError {
    #[error("line {line}: expected header `{expected}`, got `{got}`")]
    BadHeader {
        line: usize,
        expected: &'static str,
        got: String,
    },
    #[error("line {line}: missing column `{column}`")]
    MissingColumn { line: usize, column: &'static str },
    #[error("line {line}: cannot parse `{value}` in column `{column}`")]
    BadNumber {
        line: usize,
        column: &'static str,
        value: String,
    },
    #[error("no data rows")]
    Empty,
}

/// 17 significant digits: enough to reproduce any f64 bit-exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses the `mu,sigma2` posterior table.
pub fn parse_posteriors(text: &str) -> Result<Vec<GaussianPosterior>, CsvError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            let normalized: String = trimmed.chars().filter(|c| !c.is_whitespace()).collect();
            if normalized != "mu,sigma2" {
                return Err(CsvError::BadHeader {
                    line,
                    expected: "mu,sigma2",
                    got: trimmed.to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = trimmed.split(',');
        let mu_raw = fields
            .next()
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .ok_or(CsvError::MissingColumn { line, column: "mu" })?;
        let sigma2_raw = fields
            .next()
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .ok_or(CsvError::MissingColumn {
                line,
                column: "sigma2",
            })?;
        let mu = mu_raw.parse::<f64>().map_err(|_| CsvError::BadNumber {
            line,
            column: "mu",
            value: mu_raw.to_string(),
        })?;
        let sigma2 = sigma2_raw.parse::<f64>().map_err(|_| CsvError::BadNumber {
            line,
            column: "sigma2",
            value: sigma2_raw.to_string(),
        })?;
        rows.push(GaussianPosterior::new(mu, sigma2));
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(rows)
}

pub fn write_posteriors(posteriors: &[GaussianPosterior]) -> String {
    let mut out = String::from("mu,sigma2\n");
    for p in posteriors {
        out.push_str(&format!("{},{}\n", fmt_f64(p.mu), fmt_f64(p.sigma2)));
    }
    out
}

/// `lambda,total_rate_bits,entropy_coded_bits,mse_z,log_q` rows.
pub fn write_rd_points(points: &[RdPoint], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str("lambda,total_rate_bits,entropy_coded_bits,mse_z,log_q\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.lambda),
            p.total_rate_bits,
            p.entropy_coded_bits,
            fmt_f64(p.mse_z),
            fmt_f64(p.log_q)
        ));
    }
    out
}

/// Reconstruction column written by the decoder.
pub fn write_reconstructions(z_hat: &[f64]) -> String {
    let mut out = String::from("z_hat\n");
    for &z in z_hat {
        out.push_str(&fmt_f64(z));
        out.push('\n');
    }
    out
}

/// `grid_point,probability` with an origin-tag comment line.
pub fn write_codebook(codebook: &vbq_core::baselines::ScalarCodebook) -> String {
    use vbq_core::baselines::CodebookOrigin;
    let origin = match codebook.origin {
        CodebookOrigin::Uniform { delta } => format!("origin=uniform delta={}", fmt_f64(delta)),
        CodebookOrigin::KMeans => "origin=kmeans".to_string(),
        CodebookOrigin::Lloyd { lambda } => format!("origin=lloyd lambda={}", fmt_f64(lambda)),
    };
    let mut out = format!("# {origin}\ngrid_point,probability\n");
    for (g, p) in codebook.grid.iter().zip(&codebook.probabilities) {
        out.push_str(&format!("{},{}\n", fmt_f64(*g), fmt_f64(*p)));
    }
    out
}
