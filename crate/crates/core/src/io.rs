//! JSON and CSV file formats.
//!
//! Networks are stored as
//! `{"input_dim": n, "layers": [{"w", "b", "act", "nonneg"}], "out": {"w", "b"}}`
//! with every number a dyadic `{"m": "<decimal>", "e": <int>}`. Each
//! layer's input size is the previous layer's width, so it is not stored.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::network::{ActivationKind, Affine, Layer, Network};
use crate::verify::SampleRow;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineFile {
    w: Vec<Vec<Dyadic>>,
    b: Vec<Dyadic>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    w: Vec<Vec<Dyadic>>,
    b: Vec<Dyadic>,
    act: Vec<ActivationKind>,
    nonneg: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    input_dim: usize,
    layers: Vec<LayerFile>,
    out: AffineFile,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses JSON into `T`, reporting the failing field path on error.
pub fn from_json_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(s);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| schema(".", e.to_string()))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&fs::read_to_string(path)?)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = to_json_string(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn affine_checked(w: Vec<Vec<Dyadic>>, b: Vec<Dyadic>, in_dim: usize, at: &str) -> Result<Affine> {
    if w.len() != b.len() {
        return Err(schema(format!("{at}.b"), format!("{} biases for {} rows", b.len(), w.len())));
    }
    if let Some(r) = w.iter().position(|row| row.len() != in_dim) {
        return Err(schema(
            format!("{at}.w[{r}]"),
            format!("row has {} entries, expected {in_dim}", w[r].len()),
        ));
    }
    Affine::new(in_dim, w, b)
}

pub fn network_to_json(net: &Network) -> Result<String> {
    let file = NetworkFile {
        input_dim: net.input_dim(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerFile {
                w: l.affine().weights().to_vec(),
                b: l.affine().bias().to_vec(),
                act: l.activations().to_vec(),
                nonneg: l.nonneg().to_vec(),
            })
            .collect(),
        out: AffineFile {
            w: net.output().weights().to_vec(),
            b: net.output().bias().to_vec(),
        },
    };
    to_json_string(&file)
}

pub fn network_from_json(s: &str) -> Result<Network> {
    let file: NetworkFile = from_json_str(s)?;
    if file.input_dim == 0 {
        return Err(schema("input_dim", "must be positive"));
    }
    let mut prev = file.input_dim;
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, l) in file.layers.into_iter().enumerate() {
        let at = format!("layers[{i}]");
        let rows = l.w.len();
        if l.act.len() != rows {
            return Err(schema(format!("{at}.act"), format!("{} activations for {rows} neurons", l.act.len())));
        }
        if l.nonneg.len() != rows {
            return Err(schema(format!("{at}.nonneg"), format!("{} flags for {rows} neurons", l.nonneg.len())));
        }
        let affine = affine_checked(l.w, l.b, prev, &at)?;
        layers.push(Layer::new(affine, l.act, l.nonneg)?);
        prev = rows;
    }
    let out = affine_checked(file.out.w, file.out.b, prev, "out")?;
    Network::new(file.input_dim, layers, out)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    let mut s = network_to_json(net)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<Network> {
    network_from_json(&fs::read_to_string(path)?)
}

/// CSV with header `x1,…,xd,f,phi,abs_err`; values are decimal renderings
/// of the exact dyadics.
pub fn write_rows_csv<W: Write>(out: W, rows: &[SampleRow], d: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.extend(["f", "phi", "abs_err"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = r.x.iter().map(decimal).collect();
        rec.extend([decimal(&r.f), decimal(&r.phi), decimal(&r.abs_err)]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_rows_csv(path: &Path, rows: &[SampleRow], d: usize) -> Result<()> {
    write_rows_csv(fs::File::create(path)?, rows, d)
}

/// Shortest round-trip binary64 rendering, exact for values with at most 53 significant bits.
fn decimal(v: &Dyadic) -> String {
    format!("{}", v.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::build_point_fitter;
    use crate::dyadic::BitString;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};

    fn sample() -> Network {
        build_point_fitter(2, 2, &"1011".parse::<BitString>().unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let net = sample();
        let s = network_to_json(&net).unwrap();
        let back = network_from_json(&s).unwrap();
        assert_eq!(back, net);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let x = [Dyadic::new(BigInt::from(rng.gen_range(0..=1i64 << 40)), -38)];
            let a = net.eval_exact(&x);
            let b = back.eval_exact(&x);
            assert_eq!(a.is_ok(), b.is_ok());
            if let (Ok(a), Ok(b)) = (a, b) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn empty_layer_network() {
        let net = Network::affine(Affine::scalar(Dyadic::from_int(3), Dyadic::pow2(-7))).unwrap();
        assert_eq!(network_from_json(&network_to_json(&net).unwrap()).unwrap(), net);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let s = network_to_json(&sample()).unwrap();
        let bad = s.replacen("\"m\": \"1\"", "\"m\": \"1x\"", 1);
        assert_ne!(bad, s);
        match network_from_json(&bad) {
            Err(Error::Schema { path, .. }) => assert!(path.starts_with("layers[0]"), "{path}"),
            other => panic!("{other:?}"),
        }
        let wrong_dim = s.replacen("\"input_dim\": 1", "\"input_dim\": 2", 1);
        match network_from_json(&wrong_dim) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "layers[0].w[0]"),
            other => panic!("{other:?}"),
        }
        let extra = s.replacen("\"input_dim\"", "\"bogus\": 1, \"input_dim\"", 1);
        assert!(matches!(network_from_json(&extra), Err(Error::Schema { .. })));
    }

    #[test]
    fn csv_has_header() {
        let rows = vec![SampleRow {
            x: vec![Dyadic::pow2(-1), Dyadic::one()],
            f: Dyadic::pow2(-2),
            phi: Dyadic::zero(),
            abs_err: Dyadic::pow2(-2),
        }];
        let mut buf = Vec::new();
        write_rows_csv(&mut buf, &rows, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x1,x2,f,phi,abs_err\n0.5,1,0.25,0,0.25\n");
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.json");
        save_network(&p, &sample()).unwrap();
        assert_eq!(load_network(&p).unwrap(), sample());
    }
}
