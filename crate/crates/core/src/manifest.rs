//! Plain-text run manifest: every parameter needed to replay a `process`
//! run, plus informational `info.*` lines (tool version, input geometry,
//! clutter ranks, stage timings) that are ignored when replaying.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::display::{DisplayParams, Scale};
use crate::doppler::{Apodization, FrequencyBand, Sidebands};
use crate::error::{invalid, Error, Result};
use crate::holo::{plan_windows, HologramStack, Roi};
use crate::pipeline::{Mode, PipelineConfig, PowerDopplerMovie};
use crate::svd::RankRule;

/// Rectangular ROI, exclusive upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoiRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl RoiRect {
    pub fn to_roi(&self, nx: usize, ny: usize) -> Result<Roi> {
        if self.x1 > nx || self.y1 > ny {
            return invalid(format!("ROI {self} exceeds the {nx}x{ny} image"));
        }
        Roi::rect(nx, ny, self.x0, self.y0, self.x1, self.y1)
    }
}

impl std::fmt::Display for RoiRect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{},{}", self.x0, self.y0, self.x1, self.y1)
    }
}

impl std::str::FromStr for RoiRect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("ROI {s:?}: {e}")))?;
        match v[..] {
            [x0, y0, x1, y1] if x0 < x1 && y0 < y1 => Ok(RoiRect { x0, y0, x1, y1 }),
            _ => invalid(format!("ROI {s:?} must be x0,y0,x1,y1 with x0<x1 and y0<y1")),
        }
    }
}

/// Parses `F1:F2` in Hz; a `k` suffix multiplies by 1000.
pub fn parse_band(s: &str) -> Result<FrequencyBand> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("band {s:?} must be F1:F2")))?;
    FrequencyBand::new(parse_hz(a)?, parse_hz(b)?)
}

pub fn parse_hz(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, scale) = match s.strip_suffix(['k', 'K']) {
        Some(n) => (n, 1e3),
        None => (s, 1.0),
    };
    num.parse::<f64>()
        .map(|v| v * scale)
        .map_err(|e| Error::InvalidInput(format!("frequency {s:?}: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub input: PathBuf,
    pub band: FrequencyBand,
    pub window: usize,
    pub hop: usize,
    pub mode: Mode,
    pub rank_rule: RankRule,
    pub sidebands: Sidebands,
    pub apodization: Apodization,
    pub display: DisplayParams,
    pub roi: Option<RoiRect>,
    pub max_in_flight: usize,
}

impl RunManifest {
    pub fn pipeline_config(&self, stack: &HologramStack) -> Result<PipelineConfig> {
        let plan = plan_windows(stack.nt_total(), self.window, self.hop, stack.fs())?;
        let mut cfg = PipelineConfig::new(plan, self.band, self.mode).with_rank(self.rank_rule);
        cfg.sidebands = self.sidebands;
        cfg.apodization = self.apodization;
        cfg.max_in_flight = self.max_in_flight;
        Ok(cfg)
    }

    pub fn to_text(&self, stack: Option<&HologramStack>, movie: Option<&PowerDopplerMovie>) -> String {
        let mut out = String::from("# ldh run manifest\n");
        let rank = match self.rank_rule {
            RankRule::FromCutoff(f) => format!("cutoff {f}"),
            RankRule::Explicit(n) => format!("explicit {n}"),
        };
        let fields = [
            ("input", self.input.display().to_string()),
            ("band", self.band.to_string()),
            ("window", self.window.to_string()),
            ("hop", self.hop.to_string()),
            ("mode", self.mode.name().to_string()),
            ("rank_rule", rank),
            ("sidebands", sidebands_name(self.sidebands).to_string()),
            ("apodization", apodization_name(self.apodization).to_string()),
            ("lo_pct", self.display.lo_pct.to_string()),
            ("hi_pct", self.display.hi_pct.to_string()),
            ("scale", self.display.scale.to_string()),
            ("roi", self.roi.map_or("none".to_string(), |r| r.to_string())),
            ("max_in_flight", self.max_in_flight.to_string()),
        ];
        for (k, v) in fields {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(
            out,
            "info.tool = {} {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        );
        if let Some(s) = stack {
            let _ = writeln!(out, "info.dims = {}x{}x{}", s.nx(), s.ny(), s.nt_total());
            let _ = writeln!(out, "info.fs = {}", s.fs());
            let _ = writeln!(out, "info.t_win_s = {:.6}", self.window as f64 / s.fs());
        }
        if let Some(m) = movie {
            let t = &m.timings;
            let ranks: Vec<String> = m.ranks.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(out, "info.windows = {}", m.frames.len());
            let _ = writeln!(out, "info.ranks = {}", ranks.join(","));
            let _ = writeln!(
                out,
                "info.timing.decomposition_s = {:.6}",
                t.decomposition.as_secs_f64()
            );
            let _ = writeln!(out, "info.timing.spectrum_s = {:.6}", t.spectrum.as_secs_f64());
            let _ = writeln!(out, "info.timing.integration_s = {:.6}", t.integration.as_secs_f64());
            let per = if t.windows > 0 {
                t.total().as_secs_f64() / t.windows as f64
            } else {
                0.0
            };
            let _ = writeln!(out, "info.timing.per_window_s = {per:.6}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<RunManifest> {
        let mut kv = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("manifest line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !k.starts_with("info.") {
                kv.insert(k.to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| {
            kv.get(k)
                .ok_or_else(|| Error::InvalidInput(format!("manifest lacks {k:?}")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("manifest {k}: {e}")))
        };
        let int = |k: &str| -> Result<usize> {
            get(k)?
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("manifest {k}: {e}")))
        };
        let rank_rule = match get("rank_rule")?.split_once(' ') {
            Some(("cutoff", f)) => RankRule::FromCutoff(parse_hz(f)?),
            Some(("explicit", n)) => RankRule::Explicit(
                n.trim()
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("manifest rank_rule: {e}")))?,
            ),
            _ => return invalid("manifest rank_rule must be `cutoff F` or `explicit N`"),
        };
        let roi = match get("roi")?.as_str() {
            "none" => None,
            s => Some(s.parse()?),
        };
        Ok(RunManifest {
            input: PathBuf::from(get("input")?),
            band: parse_band(get("band")?)?,
            window: int("window")?,
            hop: int("hop")?,
            mode: get("mode")?.parse()?,
            rank_rule,
            sidebands: parse_sidebands(get("sidebands")?)?,
            apodization: parse_apodization(get("apodization")?)?,
            display: DisplayParams {
                lo_pct: num("lo_pct")?,
                hi_pct: num("hi_pct")?,
                scale: get("scale")?.parse::<Scale>()?,
            },
            roi,
            max_in_flight: int("max_in_flight")?,
        })
    }
}

pub fn sidebands_name(s: Sidebands) -> &'static str {
    match s {
        Sidebands::TwoSided => "two-sided",
        Sidebands::PositiveOnly => "positive",
    }
}

pub fn parse_sidebands(s: &str) -> Result<Sidebands> {
    match s {
        "two-sided" | "two" => Ok(Sidebands::TwoSided),
        "positive" => Ok(Sidebands::PositiveOnly),
        other => invalid(format!("unknown sidebands {other:?}")),
    }
}

pub fn apodization_name(a: Apodization) -> &'static str {
    match a {
        Apodization::Rectangular => "rectangular",
        Apodization::Hann => "hann",
    }
}

pub fn parse_apodization(s: &str) -> Result<Apodization> {
    match s {
        "rectangular" | "rect" => Ok(Apodization::Rectangular),
        "hann" => Ok(Apodization::Hann),
        other => invalid(format!("unknown apodization {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        RunManifest {
            input: PathBuf::from("/data/run 1.ldh"),
            band: FrequencyBand::new(2_000.0, 6_000.0).unwrap(),
            window: 256,
            hop: 128,
            mode: Mode::Svd,
            rank_rule: RankRule::FromCutoff(2_000.0),
            sidebands: Sidebands::TwoSided,
            apodization: Apodization::Rectangular,
            display: DisplayParams::default(),
            roi: Some(RoiRect {
                x0: 1,
                y0: 2,
                x1: 5,
                y1: 9,
            }),
            max_in_flight: 2,
        }
    }

    #[test]
    fn text_round_trip() {
        let m = sample();
        assert_eq!(RunManifest::parse(&m.to_text(None, None)).unwrap(), m);
        let m = RunManifest {
            rank_rule: RankRule::Explicit(0),
            roi: None,
            mode: Mode::FourierOnly,
            ..sample()
        };
        assert_eq!(RunManifest::parse(&m.to_text(None, None)).unwrap(), m);
    }

    #[test]
    fn parsing_helpers() {
        assert_eq!(
            parse_band("2k:6k").unwrap(),
            FrequencyBand::new(2_000.0, 6_000.0).unwrap()
        );
        assert_eq!(parse_band("10000:30000").unwrap().f2, 30_000.0);
        assert!(parse_band("6k:2k").is_err());
        assert!(parse_band("6k").is_err());
        assert!("1,2,3".parse::<RoiRect>().is_err());
        assert!("3,0,1,4".parse::<RoiRect>().is_err());
        assert!(RunManifest::parse("band = 1:2\n").is_err());
    }
}
