//! File formats: netpbm images, channel and system files, observation
//! directories and JSON reports.
//!
//! Images are flattened row-major into symbol sequences with PBM's
//! convention (0 = white, 1 = black). Floats written by this module are
//! rounded to 12 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::empirical::ObservationMatrix;
use crate::error::{Error, Result};
use crate::model::{Alphabet, BscParam, Channel, DependentComponentSystem, Distribution, Symbol};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRUTH_FILE: &str = "truth.pbm";

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Symbol>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Symbol>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedImage(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: pixels.len(),
            });
        }
        if let Some(&s) = pixels.iter().find(|&&s| s > 1) {
            return Err(Error::SymbolOutOfRange {
                symbol: s as usize,
                size: 2,
            });
        }
        Ok(BinaryImage { width, height, pixels })
    }

    pub fn inverted(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&s| 1 - s).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PbmEncoding {
    /// `P1`, one ASCII digit per pixel.
    Plain,
    /// `P4`, rows packed MSB-first and padded to whole bytes.
    #[default]
    Raw,
}

/// Header tokenizer shared by the netpbm formats.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() && self.bytes[self.pos] != b'#' {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedImage("truncated header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| Error::MalformedImage("non-ASCII header".into()))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let t = self.token()?;
        t.parse()
            .map_err(|_| Error::MalformedImage(format!("bad {what} {t:?}")))
    }

    /// Binary payloads start after exactly one whitespace byte.
    fn payload(&mut self) -> Result<&'a [u8]> {
        match self.bytes.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => Ok(&self.bytes[self.pos + 1..]),
            _ => Err(Error::MalformedImage("missing whitespace before raster".into())),
        }
    }
}

fn dimensions(h: &mut Header) -> Result<(usize, usize)> {
    let width = h.number("width")?;
    let height = h.number("height")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedImage(format!("empty image {width}x{height}")));
    }
    Ok((width, height))
}

/// Parses a PBM (`P1`/`P4`) or PGM (`P2`/`P5`) image. The flag is true when
/// the input was grayscale and had to be thresholded.
pub fn parse_image(bytes: &[u8]) -> Result<(BinaryImage, bool)> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token()?;
    match magic {
        "P1" => {
            let (w, ht) = dimensions(&mut h)?;
            let mut pixels = Vec::with_capacity(w * ht);
            for &c in &bytes[h.pos..] {
                match c {
                    b'0' | b'1' => pixels.push(c - b'0'),
                    c if c.is_ascii_whitespace() => {}
                    _ => return Err(Error::MalformedImage(format!("unexpected byte {c:#04x} in P1 raster"))),
                }
                if pixels.len() == w * ht {
                    break;
                }
            }
            if pixels.len() < w * ht {
                return Err(Error::MalformedImage(format!("truncated raster: {} of {} pixels", pixels.len(), w * ht)));
            }
            Ok((BinaryImage::new(w, ht, pixels)?, false))
        }
        "P4" => {
            let (w, ht) = dimensions(&mut h)?;
            let data = h.payload()?;
            let stride = w.div_ceil(8);
            if data.len() < stride * ht {
                return Err(Error::MalformedImage(format!("truncated raster: {} of {} bytes", data.len(), stride * ht)));
            }
            let pixels = (0..ht)
                .flat_map(|r| (0..w).map(move |c| (data[r * stride + c / 8] >> (7 - c % 8)) & 1))
                .collect();
            Ok((BinaryImage::new(w, ht, pixels)?, false))
        }
        "P2" | "P5" => {
            let (w, ht) = dimensions(&mut h)?;
            let maxval = h.number("maxval")?;
            if maxval == 0 || maxval > 65535 {
                return Err(Error::MalformedImage(format!("bad maxval {maxval}")));
            }
            let values: Vec<usize> = if magic == "P2" {
                (0..w * ht).map(|_| h.number("sample")).collect::<Result<_>>()?
            } else {
                let data = h.payload()?;
                let width = if maxval > 255 { 2 } else { 1 };
                if data.len() < w * ht * width {
                    return Err(Error::MalformedImage("truncated raster".into()));
                }
                data.chunks(width)
                    .take(w * ht)
                    .map(|c| c.iter().fold(0usize, |acc, &b| acc * 256 + b as usize))
                    .collect()
            };
            if let Some(v) = values.iter().find(|&&v| v > maxval) {
                return Err(Error::MalformedImage(format!("sample {v} exceeds maxval {maxval}")));
            }
            // PGM 0 is black; dark half becomes PBM 1
            let pixels = values.iter().map(|&v| Symbol::from(2 * v < maxval)).collect();
            Ok((BinaryImage::new(w, ht, pixels)?, true))
        }
        other => Err(Error::MalformedImage(format!("unsupported magic {other:?}"))),
    }
}

pub fn read_image(path: &Path) -> Result<(BinaryImage, bool)> {
    parse_image(&fs::read(path)?)
}

/// Reads a PBM file, rejecting grayscale input.
pub fn read_pbm(path: &Path) -> Result<BinaryImage> {
    match read_image(path)? {
        (img, false) => Ok(img),
        (_, true) => Err(Error::MalformedImage(format!("{} is not a PBM file", path.display()))),
    }
}

pub fn encode_pbm(img: &BinaryImage, encoding: PbmEncoding) -> Vec<u8> {
    let mut out = match encoding {
        PbmEncoding::Plain => format!("P1\n{} {}\n", img.width, img.height),
        PbmEncoding::Raw => format!("P4\n{} {}\n", img.width, img.height),
    }
    .into_bytes();
    match encoding {
        PbmEncoding::Plain => {
            for row in img.pixels.chunks(img.width) {
                // netpbm caps plain lines at 70 characters
                for line in row.chunks(70) {
                    out.extend(line.iter().map(|&s| b'0' + s));
                    out.push(b'\n');
                }
            }
        }
        PbmEncoding::Raw => {
            for row in img.pixels.chunks(img.width) {
                for byte in row.chunks(8) {
                    out.push(byte.iter().enumerate().fold(0u8, |acc, (i, &s)| acc | (s << (7 - i))));
                }
            }
        }
    }
    out
}

pub fn write_pbm(path: &Path, img: &BinaryImage, encoding: PbmEncoding) -> Result<()> {
    fs::write(path, encode_pbm(img, encoding))?;
    Ok(())
}

/// BSC list as CSV with header `index,b00`.
pub fn format_bsc_csv(params: &[BscParam]) -> String {
    let mut out = String::from("index,b00\n");
    for (i, b) in params.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, round12(b.value())));
    }
    out
}

pub fn parse_bsc_csv(text: &str) -> Result<Vec<BscParam>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "index,b00" => {}
        _ => return Err(Error::MalformedChannels("expected header `index,b00`".into())),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines {
        let bad = |why: &str| Error::MalformedChannels(format!("line {}: {why}: {line:?}", lineno + 1));
        let (idx, b) = line.split_once(',').ok_or_else(|| bad("expected two fields"))?;
        let idx: usize = idx.trim().parse().map_err(|_| bad("bad index"))?;
        if idx != out.len() {
            return Err(bad("indices must run 0, 1, 2, .."));
        }
        let b: f64 = b.trim().parse().map_err(|_| bad("bad parameter"))?;
        out.push(BscParam::new(b).map_err(|_| bad("parameter outside [0, 1]"))?);
    }
    if out.is_empty() {
        return Err(Error::MalformedChannels("no channels listed".into()));
    }
    Ok(out)
}

fn check_channels(matrices: Vec<Vec<Vec<f64>>>) -> Result<Vec<Channel>> {
    matrices
        .into_iter()
        .enumerate()
        .map(|(c, rows)| {
            Channel::new(rows).map_err(|e| match e {
                Error::NotStochastic { row, sum, .. } => Error::NotStochastic { channel: c, row, sum },
                other => other,
            })
        })
        .collect()
}

fn channel_matrices(channels: &[Channel]) -> Vec<Vec<Vec<f64>>> {
    channels
        .iter()
        .map(|c| c.to_rows().into_iter().map(|r| r.into_iter().map(round12).collect()).collect())
        .collect()
}

/// General channels as JSON: `{"channels": [[[w(0|0), w(1|0)], ..], ..]}`.
pub fn format_channels_json(channels: &[Channel]) -> Result<String> {
    #[derive(Serialize)]
    struct File {
        channels: Vec<Vec<Vec<f64>>>,
    }
    Ok(serde_json::to_string_pretty(&File {
        channels: channel_matrices(channels),
    })?)
}

pub fn parse_channels_json(text: &str) -> Result<Vec<Channel>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct File {
        channels: Vec<Vec<Vec<f64>>>,
    }
    let file: File = serde_json::from_str(text).map_err(|e| Error::MalformedChannels(e.to_string()))?;
    if file.channels.is_empty() {
        return Err(Error::MalformedChannels("no channels listed".into()));
    }
    check_channels(file.channels)
}

/// Reads channels from `.csv` (BSC list) or JSON.
pub fn read_channels(path: &Path) -> Result<Vec<Channel>> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        Ok(parse_bsc_csv(&text)?.into_iter().map(Channel::bsc).collect())
    } else {
        parse_channels_json(&text)
    }
}

/// Writes BSCs as CSV when every channel is symmetric binary and the path
/// ends in `.csv`, otherwise JSON.
pub fn write_channels(path: &Path, channels: &[Channel]) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let params = channels
            .iter()
            .map(|c| c.as_bsc(1e-12))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("CSV channel files hold binary symmetric channels only".into()))?;
        format_bsc_csv(&params)
    } else {
        format_channels_json(channels)?
    };
    fs::write(path, text)?;
    Ok(())
}

/// A full system: `{"source": [..], "channels": [..]}` or, for BSCs,
/// `{"source": [..], "bsc": [..]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub source: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bsc: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<Vec<Vec<f64>>>>,
}

impl SystemFile {
    pub fn from_system(sys: &DependentComponentSystem) -> SystemFile {
        let bsc = sys
            .channels()
            .iter()
            .map(|c| c.as_bsc(1e-12).map(|b| round12(b.value())))
            .collect::<Option<Vec<_>>>();
        SystemFile {
            source: sys.source().probs().iter().copied().map(round12).collect(),
            channels: if bsc.is_none() { Some(channel_matrices(sys.channels())) } else { None },
            bsc,
        }
    }

    pub fn to_system(&self) -> Result<DependentComponentSystem> {
        let channels = match (&self.bsc, &self.channels) {
            (Some(bs), None) => bs
                .iter()
                .map(|&b| BscParam::new(b).map(Channel::bsc))
                .collect::<Result<Vec<_>>>()?,
            (None, Some(m)) => check_channels(m.clone())?,
            _ => {
                return Err(Error::MalformedChannels(
                    "system file needs exactly one of `bsc` and `channels`".into(),
                ))
            }
        };
        DependentComponentSystem::new(Distribution::new(self.source.clone())?, channels)
    }
}

pub fn read_system(path: &Path) -> Result<DependentComponentSystem> {
    let file: SystemFile =
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::MalformedChannels(e.to_string()))?;
    file.to_system()
}

pub fn write_system(path: &Path, sys: &DependentComponentSystem) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&SystemFile::from_system(sys))?)?;
    Ok(())
}

/// Metadata of an observation directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub rng: String,
    pub copies: Vec<String>,
    /// Generating system, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
}

pub fn copy_file_name(j: usize) -> String {
    format!("copy_{:02}.pbm", j + 1)
}

/// Writes `copy_01.pbm ..`, an optional `truth.pbm` and `manifest.json`.
pub fn write_observation_dir(
    dir: &Path,
    obs: &ObservationMatrix,
    width: usize,
    truth: Option<&BinaryImage>,
    mut manifest: Manifest,
) -> Result<()> {
    if !obs.alphabet().is_binary() {
        return Err(Error::NonBinaryAlphabet(obs.alphabet().size()));
    }
    if width == 0 || !obs.n().is_multiple_of(width) {
        return Err(Error::InvalidArgument(format!("width {width} does not divide n = {}", obs.n())));
    }
    fs::create_dir_all(dir)?;
    let height = obs.n() / width;
    manifest.copies.clear();
    for j in 0..obs.k() {
        let name = copy_file_name(j);
        write_pbm(&dir.join(&name), &BinaryImage::new(width, height, obs.column(j))?, PbmEncoding::Raw)?;
        manifest.copies.push(name);
    }
    manifest.truth = match truth {
        Some(img) => {
            write_pbm(&dir.join(TRUTH_FILE), img, PbmEncoding::Raw)?;
            Some(TRUTH_FILE.into())
        }
        None => None,
    };
    manifest.n = obs.n();
    manifest.k = obs.k();
    manifest.width = width;
    manifest.height = height;
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// An observation directory read back into memory.
#[derive(Clone, Debug)]
pub struct ObservationSet {
    pub obs: ObservationMatrix,
    pub width: usize,
    pub height: usize,
    pub manifest: Manifest,
    pub dir: PathBuf,
}

impl ObservationSet {
    pub fn truth_path(&self) -> Option<PathBuf> {
        self.manifest.truth.as_ref().map(|t| self.dir.join(t))
    }
}

pub fn read_observation_dir(dir: &Path) -> Result<ObservationSet> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    if manifest.copies.len() != manifest.k || manifest.k == 0 {
        return Err(Error::InvalidArgument(format!(
            "manifest lists {} copies but K = {}",
            manifest.copies.len(),
            manifest.k
        )));
    }
    let mut columns = Vec::with_capacity(manifest.k);
    for name in &manifest.copies {
        let img = read_pbm(&dir.join(name))?;
        if (img.width, img.height) != (manifest.width, manifest.height) {
            return Err(Error::MalformedImage(format!(
                "{name} is {}x{}, manifest says {}x{}",
                img.width, img.height, manifest.width, manifest.height
            )));
        }
        columns.push(img.pixels);
    }
    Ok(ObservationSet {
        obs: ObservationMatrix::from_columns(Alphabet::BINARY, &columns)?,
        width: manifest.width,
        height: manifest.height,
        manifest,
        dir: dir.to_path_buf(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub l1: f64,
    pub l2: f64,
}

/// Result document of the `estimate`, `denoise` and `baseline` commands.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub algorithm: String,
    pub seed: Option<u64>,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub p_hat: Vec<f64>,
    pub b_hat: Option<Vec<f64>>,
    pub branch: Option<String>,
    pub residuals: Option<Residuals>,
    pub expected_distortion: Option<f64>,
    pub achieved_distortion_up_to_permutation: Option<f64>,
    pub runtime_ms: f64,
    /// Estimated channels as matrices (general methods only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clamped: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Report {
    /// Copy with every float rounded to 12 significant digits.
    pub fn rounded(&self) -> Report {
        let r = |v: &[f64]| v.iter().copied().map(round12).collect::<Vec<_>>();
        Report {
            p_hat: r(&self.p_hat),
            b_hat: self.b_hat.as_deref().map(r),
            residuals: self.residuals.as_ref().map(|x| Residuals {
                l1: round12(x.l1),
                l2: round12(x.l2),
            }),
            expected_distortion: self.expected_distortion.map(round12),
            achieved_distortion_up_to_permutation: self.achieved_distortion_up_to_permutation.map(round12),
            runtime_ms: round12(self.runtime_ms),
            channels: self
                .channels
                .as_ref()
                .map(|cs| cs.iter().map(|m| m.iter().map(|row| r(row)).collect()).collect()),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rounded())?)
    }
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    fs::write(path, report.to_json()? + "\n")?;
    Ok(())
}
