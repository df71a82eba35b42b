//! Resolution of the representation flags shared by every subcommand.

use clap::Args;
use serde_json::{json, Value};

use properaff::exact::{fmt_rat, int, QVec};
use properaff::root_system::build_root_system;
use properaff::{ConcreteRep, Error, Family, GroupKind, RepKind, RootSystemData, Result};

#[derive(Args, Debug, Clone, Default)]
pub struct RepArgs {
    /// Root system family (A, B, C, D, BC).
    #[arg(value_name = "FAMILY")]
    pub family_pos: Option<String>,
    #[arg(value_name = "RANK")]
    pub rank_pos: Option<usize>,
    #[arg(long, conflicts_with = "family_pos")]
    pub family: Option<String>,
    #[arg(long, conflicts_with = "rank_pos")]
    pub rank: Option<usize>,
    /// Concrete group such as so21, sl3 or so(3,2).
    #[arg(long)]
    pub group: Option<String>,
    /// Highest weight in fundamental-weight coordinates, e.g. 0,5,1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          conflicts_with_all = ["sym", "wedge", "adjoint", "standard", "trivial", "rep"])]
    pub highest: Option<Vec<i64>>,
    /// k-th symmetric power of the standard representation.
    #[arg(long, conflicts_with_all = ["wedge", "adjoint", "standard", "trivial", "rep"])]
    pub sym: Option<usize>,
    /// k-th exterior power of the standard representation.
    #[arg(long, conflicts_with_all = ["adjoint", "standard", "trivial", "rep"])]
    pub wedge: Option<usize>,
    #[arg(long, conflicts_with_all = ["standard", "trivial", "rep"])]
    pub adjoint: bool,
    #[arg(long, conflicts_with_all = ["trivial", "rep"])]
    pub standard: bool,
    #[arg(long, conflicts_with = "rep")]
    pub trivial: bool,
    /// Representation by name: std, symK, wedgeK, adj, triv.
    #[arg(long)]
    pub rep: Option<String>,
}

/// Either an abstract `(Φ, λ)` pair or a realized `(G, ρ)`.
pub enum Resolved {
    Abstract { rs: RootSystemData, highest: QVec },
    Concrete(Box<ConcreteRep>),
}

impl Resolved {
    pub fn rs(&self) -> &RootSystemData {
        match self {
            Resolved::Abstract { rs, .. } => rs,
            Resolved::Concrete(r) => &r.rs,
        }
    }

    pub fn highest(&self) -> &QVec {
        match self {
            Resolved::Abstract { highest, .. } => highest,
            Resolved::Concrete(r) => &r.highest,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl RepArgs {
    fn family_rank(&self) -> Result<Option<(Family, usize)>> {
        let family = self.family.as_ref().or(self.family_pos.as_ref());
        let rank = self.rank.or(self.rank_pos);
        match (family, rank) {
            (None, None) => Ok(None),
            (Some(f), Some(n)) => Ok(Some((f.parse()?, n))),
            _ => Err(bad("family and rank must be given together")),
        }
    }

    fn rep_kind(&self) -> Result<Option<RepKind>> {
        Ok(if let Some(k) = self.sym {
            Some(RepKind::Sym(k))
        } else if let Some(k) = self.wedge {
            Some(RepKind::Wedge(k))
        } else if self.adjoint {
            Some(RepKind::Adjoint)
        } else if self.standard {
            Some(RepKind::Standard)
        } else if self.trivial {
            Some(RepKind::Trivial)
        } else if let Some(r) = &self.rep {
            Some(r.parse()?)
        } else {
            None
        })
    }

    /// The group realizing a split family: `A_n → SL(n+1)`, `B_n → SO(n+1, n)`.
    fn group_kind(&self) -> Result<GroupKind> {
        if let Some(g) = &self.group {
            if self.family_rank()?.is_some() {
                return Err(bad("give either --group or a family and rank, not both"));
            }
            return g.parse();
        }
        match self.family_rank()? {
            Some((Family::A, n)) if n >= 1 => Ok(GroupKind::SL(n + 1)),
            Some((Family::B, n)) if n >= 1 => Ok(GroupKind::SO(n + 1, n)),
            Some((f, n)) => Err(Error::Unsupported(format!("{f}{n}"), "no concrete realization; use --group".into())),
            None => Err(bad("a group (--group) or a family and rank is required")),
        }
    }

    /// Resolves to a realized representation; the default is the standard one.
    pub fn concrete(&self) -> Result<ConcreteRep> {
        if self.highest.is_some() {
            return Err(bad("--highest has no concrete realization; name the representation instead"));
        }
        let group = self.group_kind()?;
        let kind = self.rep_kind()?.unwrap_or(RepKind::Standard);
        ConcreteRep::realize(group, kind)
    }

    /// Resolves to root system data and a highest weight, realizing the
    /// representation only when a group is named.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.group.is_some() {
            return Ok(Resolved::Concrete(Box::new(self.concrete()?)));
        }
        let (family, n) = self.family_rank()?.ok_or_else(|| bad("a family and rank (or --group) is required"))?;
        let rs = build_root_system(family, n)?;
        let omega = |c: Vec<i64>| rs.from_omega_coords(&c.into_iter().map(int).collect::<Vec<_>>());
        let unit = |k: usize| -> Result<QVec> {
            if k == 0 || k > rs.rank {
                return Err(bad(format!("fundamental weight index {k} out of range 1..={}", rs.rank)));
            }
            Ok(omega((1..=rs.rank).map(|i| (i == k) as i64).collect()))
        };
        let highest = if let Some(c) = &self.highest {
            if c.len() != rs.rank {
                return Err(bad(format!("--highest needs {} coordinates, got {}", rs.rank, c.len())));
            }
            omega(c.clone())
        } else {
            match self.rep_kind()?.ok_or_else(|| bad("one of --highest, --sym, --wedge, --adjoint, --standard is required"))? {
                RepKind::Standard => unit(1)?,
                RepKind::Sym(k) => unit(1)?.iter().map(|x| x * int(k as i64)).collect(),
                RepKind::Wedge(k) => unit(k)?,
                RepKind::Trivial => vec![int(0); rs.ambient_dim],
                RepKind::Adjoint => highest_root(&rs)?,
            }
        };
        Ok(Resolved::Abstract { rs, highest })
    }

    /// Echo of the flags as given.
    pub fn echo(&self) -> Value {
        json!({
            "family": self.family.as_ref().or(self.family_pos.as_ref()),
            "rank": self.rank.or(self.rank_pos),
            "group": self.group,
            "rep": self.rep_kind().ok().flatten().map(|k| k.to_string()),
            "highest_omega": self.highest,
        })
    }

    /// Echo including what the flags resolved to.
    pub fn echo_resolved(&self, r: &Resolved) -> Value {
        let mut v = self.echo();
        v["root_system"] = json!(r.rs().label());
        v["highest_weight"] = json!(r.highest().iter().map(fmt_rat).collect::<Vec<_>>());
        if let Resolved::Concrete(c) = r {
            add_concrete(&mut v, c);
        }
        v
    }

    pub fn echo_concrete(&self, c: &ConcreteRep) -> Value {
        let mut v = self.echo();
        v["root_system"] = json!(c.rs.label());
        v["highest_weight"] = json!(c.highest.iter().map(fmt_rat).collect::<Vec<_>>());
        add_concrete(&mut v, c);
        v
    }
}

fn add_concrete(v: &mut Value, c: &ConcreteRep) {
    v["group"] = json!(c.group.to_string());
    v["rep"] = json!(c.kind.to_string());
    v["dim_v"] = json!(c.dim_v);
}

/// The highest root, i.e. the positive root of largest height.
fn highest_root(rs: &RootSystemData) -> Result<QVec> {
    if !rs.is_simple() {
        return Err(Error::Unsupported(rs.label(), "--adjoint needs an irreducible root system".into()));
    }
    let height = |r: &QVec| -> properaff::Rat { rs.root_coords(r).map(|c| c.iter().sum()).unwrap_or_else(|| int(0)) };
    rs.positive_roots.iter().max_by_key(|r| height(r)).cloned().ok_or_else(|| bad("empty root system"))
}
