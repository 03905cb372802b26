use std::fs;
use std::path::{Path, PathBuf};

use super::suite::{BenchProblem, BenchmarkSuite};
use crate::dataset::{
    discharge_segments, invert_current, read_timeseries, resample_uniform, ColumnMap, WindowPolicy,
};
use crate::ecm::{CellSpec, OcvCurve};
use crate::error::{Error, Result};
use crate::kv::{self, KeyValues};
use crate::optimize::{FitProblem, Method, OptimizerConfig, SearchSpace};

/// Polynomial degree used when the OCV is identified jointly.
pub const DEFAULT_JOINT_DEGREE: usize = 5;

/// How cycler files are turned into identification problems.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub columns: ColumnMap,
    pub policy: WindowPolicy,
    pub invert_current: bool,
    /// Resample windows onto a uniform grid with this step (seconds).
    pub resample: Option<f64>,
    /// Fixed OCV curve; `None` identifies a polynomial jointly.
    pub ocv: Option<OcvCurve>,
    pub ocv_degree: usize,
    /// `bounds.*` overrides for the search box.
    pub bounds: KeyValues,
    /// Keep only the first `n` usable cycles of each file.
    pub max_cycles: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            columns: ColumnMap::default(),
            policy: WindowPolicy::default(),
            invert_current: false,
            resample: None,
            ocv: None,
            ocv_degree: DEFAULT_JOINT_DEGREE,
            bounds: KeyValues::new(),
            max_cycles: None,
        }
    }
}

impl LoadOptions {
    /// Column, window and bound settings from a configuration file.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut out = Self {
            columns: ColumnMap::default().with_overrides(kv),
            policy: WindowPolicy::default().with_overrides(kv)?,
            ..Self::default()
        };
        out.bounds = kv
            .iter()
            .filter(|(k, _)| k.starts_with("bounds."))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Ok(out)
    }

    fn space(&self) -> Result<SearchSpace> {
        let base = match self.ocv {
            Some(_) => SearchSpace::default_fixed(),
            None => SearchSpace::default_joint(self.ocv_degree),
        };
        base.with_overrides(&self.bounds)
    }
}

/// Read a cycler CSV and build one problem per usable discharge cycle.
pub fn load_problems(
    path: impl AsRef<Path>,
    cell_id: &str,
    cell: &CellSpec,
    options: &LoadOptions,
) -> Result<Vec<FitProblem>> {
    let mut records = read_timeseries(path, &options.columns)?;
    if options.invert_current {
        invert_current(&mut records);
    }
    let mut segments = discharge_segments(cell_id, &records, &options.policy, cell)?;
    if let Some(n) = options.max_cycles {
        segments.truncate(n.max(1));
    }
    let space = options.space()?;
    segments
        .into_iter()
        .map(|seg| {
            let seg = match options.resample {
                Some(dt) => resample_uniform(&seg, dt)?,
                None => seg,
            };
            let cell = seg.cell();
            FitProblem::new(seg, options.ocv.clone(), cell, space.clone())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub cell_id: String,
    /// Ampere-hour.
    pub capacity: f64,
    pub soc_init: f64,
}

/// Benchmark manifest.
///
/// ```text
/// methods=ls,pso
/// seeds=1,2,3
/// config=optimizer.cfg
/// ocv=ocv.txt
/// data/cell_a.csv,cell_a,2.5
/// data/cell_b.csv,cell_b,2.5,0.95
/// ```
///
/// Header keys: `methods`, `seeds`, `config`, `ocv`, `ocv_degree`,
/// `max_cycles`, `resample`, `invert_current`. Relative paths resolve
/// against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub config: Option<PathBuf>,
    pub ocv: Option<PathBuf>,
    pub ocv_degree: usize,
    pub max_cycles: Option<usize>,
    pub resample: Option<f64>,
    pub invert_current: bool,
    pub entries: Vec<ManifestEntry>,
}

const HEADER_KEYS: [&str; 8] = [
    "methods",
    "seeds",
    "config",
    "ocv",
    "ocv_degree",
    "max_cycles",
    "resample",
    "invert_current",
];

fn parse_list<T: std::str::FromStr>(value: &str, line: usize, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>().map_err(|e| Error::Parse {
                line,
                message: format!("bad {what} `{s}`: {e}"),
            })
        })
        .collect()
}

impl Manifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut header = KeyValues::new();
        let mut entries = Vec::new();
        let mut methods = None;
        let mut seeds = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                let k = k.trim();
                if HEADER_KEYS.contains(&k) {
                    let v = v.trim();
                    match k {
                        "methods" => {
                            methods = Some(
                                parse_list::<String>(v, line_no, "method")?
                                    .iter()
                                    .map(|m| m.parse::<Method>())
                                    .collect::<Result<Vec<_>>>()?,
                            )
                        }
                        "seeds" => seeds = Some(parse_list::<u64>(v, line_no, "seed")?),
                        _ => {
                            header.insert(k.to_string(), v.to_string());
                        }
                    }
                    continue;
                }
                if !k.contains(',') {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown manifest key `{k}`"),
                    });
                }
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected path,cell_id,capacity_Ah[,soc_init]".into(),
                });
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad {what} `{s}`: {e}"),
                })
            };
            let capacity = num(fields[2], "capacity")?;
            let soc_init = match fields.get(3) {
                Some(s) => num(s, "soc_init")?,
                None => 1.0,
            };
            CellSpec::new(capacity, soc_init).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            entries.push(ManifestEntry {
                path: base.join(fields[0]),
                cell_id: fields[1].to_string(),
                capacity,
                soc_init,
            });
        }
        if entries.is_empty() {
            return Err(Error::Config("manifest lists no problems".into()));
        }
        let methods = methods.unwrap_or_else(|| Method::ALL.to_vec());
        let seeds = seeds.unwrap_or_else(|| vec![42]);
        if methods.is_empty() || seeds.is_empty() {
            return Err(Error::Config(
                "manifest needs at least one method and seed".into(),
            ));
        }
        let path_of = |k: &str| header.get(k).map(|p| base.join(p));
        Ok(Self {
            methods,
            seeds,
            config: path_of("config"),
            ocv: path_of("ocv"),
            ocv_degree: kv::get(&header, "ocv_degree")?.unwrap_or(DEFAULT_JOINT_DEGREE),
            max_cycles: kv::get(&header, "max_cycles")?,
            resample: kv::get(&header, "resample")?,
            invert_current: kv::get(&header, "invert_current")?.unwrap_or(false),
            entries,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Load every listed file and assemble the suite.
    pub fn load_suite(&self) -> Result<BenchmarkSuite> {
        let kv = match &self.config {
            Some(p) => kv::read_kv(p)?,
            None => KeyValues::new(),
        };
        let config = OptimizerConfig::from_kv(&kv)?;
        let mut options = LoadOptions::from_kv(&kv)?;
        options.invert_current = self.invert_current;
        options.resample = self.resample;
        options.max_cycles = self.max_cycles;
        options.ocv_degree = self.ocv_degree;
        options.ocv = self.ocv.as_ref().map(OcvCurve::read).transpose()?;

        let mut problems = Vec::new();
        for e in &self.entries {
            let cell = CellSpec::new(e.capacity, e.soc_init)?;
            let source = e.path.display().to_string();
            for p in load_problems(&e.path, &e.cell_id, &cell, &options)? {
                problems.push(BenchProblem::new(p, source.clone()));
            }
        }
        BenchmarkSuite::new(problems, self.methods.clone(), config, self.seeds.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_entries() {
        let text = "# suite\nmethods=ls, pso\nseeds=1,2,3\nocv=ocv.txt\na.csv,cell_a,2.5\nsub/b.csv,cell_b,3,0.9\n";
        let m = Manifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.methods, vec![Method::Ls, Method::Pso]);
        assert_eq!(m.seeds, vec![1, 2, 3]);
        assert_eq!(m.ocv, Some(PathBuf::from("/data/ocv.txt")));
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[1].path, PathBuf::from("/data/sub/b.csv"));
        assert_eq!(m.entries[1].soc_init, 0.9);
        assert_eq!(m.entries[0].soc_init, 1.0);
    }

    #[test]
    fn rejects_bad_manifests() {
        let base = Path::new(".");
        assert!(matches!(
            Manifest::parse("methods=ls\n", base),
            Err(Error::Config(_))
        ));
        assert!(Manifest::parse("methods=nosuch\na.csv,c,1\n", base).is_err());
        assert!(Manifest::parse("colour=red\na.csv,c,1\n", base).is_err());
        assert!(Manifest::parse("a.csv,c\n", base).is_err());
        assert!(Manifest::parse("a.csv,c,-1\n", base).is_err());
    }
}
