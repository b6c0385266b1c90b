//! Exact rates, capacities and baselines.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::is_prime_power;
use crate::scheme::{SchemeKind, SchemeParams};

fn int(n: u64) -> BigInt {
    BigInt::from(n)
}

fn pow(b: BigInt, e: u64) -> BigInt {
    Pow::pow(b, e)
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

fn check_general(n: u64, k: u64, q: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 servers, got {n}")));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("need at least 1 file".into()));
    }
    if !is_prime_power(q) {
        return Err(Error::InvalidParameter(format!("{q} is not a prime power")));
    }
    if q < n {
        return Err(Error::InvalidParameter(format!("field order {q} is smaller than the number of servers {n}")));
    }
    Ok(())
}

/// Capacity of the two-server binary problem, 2^(K-1) / (2^K - 1).
pub fn binary_capacity(k: u64) -> Result<BigRational> {
    if k < 1 {
        return Err(Error::InvalidParameter("need at least 1 file".into()));
    }
    let two_k = pow(int(2), k);
    Ok(ratio(&two_k / 2, two_k - 1))
}

/// Closed-form rate of the N-server scheme over GF(q):
/// (1 - 1/N) (1 + (1/(N-1)) ((q-1)/(q^K-1))^(N-1)).
pub fn general_rate(n: u64, k: u64, q: u64) -> Result<BigRational> {
    check_general(n, k, q)?;
    let nn = ratio(int(n), One::one());
    let one = BigRational::one();
    let x = ratio(int(q - 1), pow(int(q), k) - 1);
    Ok((&one - nn.recip()) * (one + x.pow(n as i32 - 1) / ratio(int(n - 1), One::one())))
}

/// L for the N-server scheme: (N-1)(q^K-1)^(N-1) + (q-1)^(N-1).
pub fn general_layers(n: u64, k: u64, q: u64) -> Result<BigInt> {
    check_general(n, k, q)?;
    let e = n - 1;
    Ok(int(n - 1) * pow(pow(int(q), k) - 1, e) + pow(int(q - 1), e))
}

/// Q for the N-server scheme: N(q^K-1)^(N-1).
pub fn general_downloads(n: u64, k: u64, q: u64) -> Result<BigInt> {
    check_general(n, k, q)?;
    Ok(int(n) * pow(pow(int(q), k) - 1, n - 1))
}

/// L / Q from the counting formulas.
pub fn general_rate_counting(n: u64, k: u64, q: u64) -> Result<BigRational> {
    Ok(ratio(general_layers(n, k, q)?, general_downloads(n, k, q)?))
}

/// Rate of plain PIR over the (q^K-1)/(q-1) functions treated as
/// independent virtual files: (1 - 1/N) (1 - N^(-M))^(-1).
pub fn pir_virtual_rate(n: u64, k: u64, q: u64) -> Result<BigRational> {
    check_general(n, k, q)?;
    let m: BigInt = (pow(int(q), k) - 1) / int(q - 1);
    let m: u64 = m.try_into().map_err(|_| Error::InvalidParameter("too many virtual files".into()))?;
    let nm = pow(int(n), m);
    Ok(ratio(int(n - 1) * &nm, int(n) * (nm - 1)))
}

/// Limit of the rate as K grows: 1 - 1/N.
pub fn asymptotic_capacity(n: u64) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 servers, got {n}")));
    }
    Ok(ratio(int(n - 1), int(n)))
}

/// general_rate - (1 - 1/N), computed by subtraction.
pub fn excess(n: u64, k: u64, q: u64) -> Result<BigRational> {
    Ok(general_rate(n, k, q)? - asymptotic_capacity(n)?)
}

/// (1/N) ((q-1)/(q^K-1))^(N-1).
pub fn excess_closed_form(n: u64, k: u64, q: u64) -> Result<BigRational> {
    check_general(n, k, q)?;
    let x = ratio(int(q - 1), pow(int(q), k) - 1);
    Ok(x.pow(n as i32 - 1) / ratio(int(n), One::one()))
}

/// Decimal rendering with `digits` places, rounded half away from zero.
pub fn to_decimal(r: &BigRational, digits: usize) -> String {
    let scale = pow(int(10), digits as u64);
    let scaled = r * ratio(scale.clone(), One::one());
    let rounded = scaled.round().to_integer();
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let (whole, frac) = (&abs / &scale, &abs % &scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0>digits$}")
    }
}

fn fraction(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Better,
    Equal,
    Worse,
}

impl From<Ordering> for Verdict {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Greater => Verdict::Better,
            Ordering::Equal => Verdict::Equal,
            Ordering::Less => Verdict::Worse,
        }
    }
}

/// Rate of one configuration together with its reference values.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub scheme: SchemeKind,
    pub servers: u64,
    pub files: u64,
    pub field_order: u64,
    pub layers: BigInt,
    pub downloads: BigInt,
    pub rate: BigRational,
    /// Known capacity (binary scheme only).
    pub capacity: Option<BigRational>,
    pub asymptotic: BigRational,
    pub pir_baseline: BigRational,
    pub excess: BigRational,
    pub vs_pir: Verdict,
}

impl RateReport {
    pub fn for_params(params: &SchemeParams) -> Result<Self> {
        let (n, k, q) = (params.servers() as u64, params.files() as u64, params.field().order() as u64);
        let (layers, downloads) = match params.kind() {
            SchemeKind::Binary => (pow(int(2), k + 1), 4 * (pow(int(2), k) - 1)),
            SchemeKind::General => (general_layers(n, k, q)?, general_downloads(n, k, q)?),
        };
        let rate = ratio(layers.clone(), downloads.clone());
        let capacity = match params.kind() {
            SchemeKind::Binary => Some(binary_capacity(k)?),
            SchemeKind::General => None,
        };
        let asymptotic = asymptotic_capacity(n)?;
        let pir_baseline = pir_virtual_rate(n, k, q)?;
        Ok(RateReport {
            scheme: params.kind(),
            servers: n,
            files: k,
            field_order: q,
            excess: &rate - &asymptotic,
            vs_pir: rate.cmp(&pir_baseline).into(),
            layers,
            downloads,
            rate,
            capacity,
            asymptotic,
            pir_baseline,
        })
    }

    pub fn row(&self, digits: usize) -> RateRow {
        RateRow {
            scheme: self.scheme,
            n: self.servers,
            k: self.files,
            q: self.field_order,
            l: self.layers.to_string(),
            q_download: self.downloads.to_string(),
            rate: fraction(&self.rate),
            rate_decimal: to_decimal(&self.rate, digits),
            capacity: self.capacity.as_ref().map(fraction).unwrap_or_default(),
            capacity_decimal: self.capacity.as_ref().map(|c| to_decimal(c, digits)).unwrap_or_default(),
            asymptotic: fraction(&self.asymptotic),
            pir_baseline: fraction(&self.pir_baseline),
            pir_baseline_decimal: to_decimal(&self.pir_baseline, digits),
            excess: fraction(&self.excess),
            vs_pir: self.vs_pir,
        }
    }
}

/// Flat, serializable view of a [`RateReport`].
#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub scheme: SchemeKind,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "K")]
    pub k: u64,
    pub q: u64,
    #[serde(rename = "L")]
    pub l: String,
    #[serde(rename = "Q")]
    pub q_download: String,
    pub rate: String,
    pub rate_decimal: String,
    pub capacity: String,
    pub capacity_decimal: String,
    pub asymptotic: String,
    pub pir_baseline: String,
    pub pir_baseline_decimal: String,
    pub excess: String,
    pub vs_pir: Verdict,
}

pub fn rows_to_csv(rows: &[RateRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

pub fn rows_to_json(rows: &[RateRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_capacity_values() {
        assert_eq!(binary_capacity(1).unwrap(), r(1, 1));
        assert_eq!(binary_capacity(2).unwrap(), r(2, 3));
        assert_eq!(binary_capacity(3).unwrap(), r(4, 7));
        assert!(binary_capacity(0).is_err());
    }

    #[test]
    fn general_rate_values() {
        assert_eq!(general_rate(2, 2, 2).unwrap(), r(2, 3));
        assert_eq!(general_rate(3, 2, 3).unwrap(), r(11, 16));
        assert_eq!(general_rate_counting(3, 2, 3).unwrap(), r(11, 16));
        assert!(general_rate(4, 2, 3).is_err());
        assert!(general_rate(2, 2, 6).is_err());
    }

    #[test]
    fn baselines() {
        assert_eq!(pir_virtual_rate(2, 2, 2).unwrap(), r(4, 7));
        assert_eq!(pir_virtual_rate(3, 2, 3).unwrap(), r(27, 40));
        assert_eq!(asymptotic_capacity(3).unwrap(), r(2, 3));
        assert_eq!(excess(3, 2, 3).unwrap(), r(1, 48));
        assert_eq!(excess_closed_form(3, 2, 3).unwrap(), r(1, 48));
        // one file over GF(2): both schemes download everything
        assert_eq!(general_rate(2, 1, 2).unwrap(), pir_virtual_rate(2, 1, 2).unwrap());
    }

    #[test]
    fn decimals() {
        assert_eq!(to_decimal(&r(11, 16), 4), "0.6875");
        assert_eq!(to_decimal(&r(2, 3), 3), "0.667");
        assert_eq!(to_decimal(&r(-1, 48), 5), "-0.02083");
        assert_eq!(to_decimal(&r(3, 2), 0), "2");
    }

    #[test]
    fn report_and_csv() {
        let report = RateReport::for_params(&SchemeParams::general(3, 2, 3, 1).unwrap()).unwrap();
        assert_eq!(report.rate, r(11, 16));
        assert_eq!(report.vs_pir, Verdict::Better);
        let csv = rows_to_csv(&[report.row(6)]).unwrap();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("scheme,N,K,q,L,Q,rate"));
        assert!(lines.next().unwrap().starts_with("general,3,2,3,132,192,11/16,0.687500"));
        let json = rows_to_json(&[report.row(6)]).unwrap();
        assert!(json.contains("\"pir_baseline\": \"27/40\""));
    }
}
