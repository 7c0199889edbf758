//! Plain-text mesh format.
//!
//! ```text
//! freqbc-mesh 1
//! length <S>
//! patches <P>
//!   <center> <half> <ln_scale> <x_interface> <D|N|R>
//! vertices <V>
//!   <x> <y> <patch|-> [<X> <Y>]
//! triangles <T>
//!   <a> <b> <c> <patch|-> [blend <Xa> <Ya> <Xb> <Yb> <Xc> <Yc>]
//! boundary_edges <E>
//!   <v0> <v1> <base> <t0> <t1> <D|N|R> <linear | cosh <half> | cos <half>>
//! ```
//! Floats are written in shortest round-trip form, so export followed by import is exact.

use super::{Blend, BoundaryEdge, EdgeParam, Mesh, MeshError, Patch, Tag};
use std::fmt::Write as _;

impl Mesh {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "freqbc-mesh 1");
        let _ = writeln!(out, "length {:e}", self.length);
        let _ = writeln!(out, "patches {}", self.patches.len());
        for p in &self.patches {
            let _ = writeln!(
                out,
                "{:e} {:e} {:e} {:e} {}",
                p.center,
                p.half,
                p.ln_scale,
                p.x_interface,
                p.feature.letter()
            );
        }
        let _ = writeln!(out, "vertices {}", self.vertices.len());
        for (v, c) in self.vertices.iter().zip(&self.charts) {
            match c {
                None => {
                    let _ = writeln!(out, "{:e} {:e} -", v[0], v[1]);
                }
                Some((p, z)) => {
                    let _ = writeln!(out, "{:e} {:e} {} {:e} {:e}", v[0], v[1], p, z[0], z[1]);
                }
            }
        }
        let _ = writeln!(out, "triangles {}", self.triangles.len());
        for ((t, p), b) in self.triangles.iter().zip(&self.triangle_patch).zip(&self.blends) {
            let owner = p.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
            let _ = write!(out, "{} {} {} {}", t[0], t[1], t[2], owner);
            if let Some(b) = b {
                let _ = write!(
                    out,
                    " blend {:e} {:e} {:e} {:e} {:e} {:e}",
                    b.a[0], b.a[1], b.b[0], b.b[1], b.c[0], b.c[1]
                );
            }
            out.push('\n');
        }
        let _ = writeln!(out, "boundary_edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let param = match e.param {
                EdgeParam::Linear => "linear".to_string(),
                EdgeParam::Cosh { half } => format!("cosh {half:e}"),
                EdgeParam::Cos { half } => format!("cos {half:e}"),
            };
            let _ = writeln!(
                out,
                "{} {} {:e} {:e} {:e} {} {}",
                e.v[0],
                e.v[1],
                e.base,
                e.t[0],
                e.t[1],
                e.tag.letter(),
                param
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Mesh, MeshError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |want: Option<&str>| -> Result<(usize, Vec<String>), MeshError> {
            let (i, l) = lines.next().ok_or(MeshError::Parse {
                line: 0,
                reason: "unexpected end of file".into(),
            })?;
            let words: Vec<String> = l.split_whitespace().map(str::to_string).collect();
            if let Some(w) = want {
                if words.first().map(String::as_str) != Some(w) {
                    return Err(MeshError::Parse {
                        line: i + 1,
                        reason: format!("expected `{w}`"),
                    });
                }
            }
            Ok((i + 1, words))
        };
        fn num<T: std::str::FromStr>(line: usize, w: Option<&String>) -> Result<T, MeshError> {
            w.and_then(|s| s.parse().ok()).ok_or(MeshError::Parse {
                line,
                reason: format!("bad or missing number {:?}", w),
            })
        }
        fn tag(line: usize, w: Option<&String>) -> Result<Tag, MeshError> {
            w.and_then(|s| Tag::from_letter(s)).ok_or(MeshError::Parse {
                line,
                reason: "bad tag".into(),
            })
        }
        fn owner(line: usize, w: Option<&String>) -> Result<Option<usize>, MeshError> {
            match w.map(String::as_str) {
                Some("-") => Ok(None),
                _ => num(line, w).map(Some),
            }
        }

        let (l, w) = next(Some("freqbc-mesh"))?;
        if w.get(1).map(String::as_str) != Some("1") {
            return Err(MeshError::Parse { line: l, reason: "unsupported version".into() });
        }
        let (l, w) = next(Some("length"))?;
        let length: f64 = num(l, w.get(1))?;
        let (l, w) = next(Some("patches"))?;
        let np: usize = num(l, w.get(1))?;
        let mut patches = Vec::with_capacity(np);
        for _ in 0..np {
            let (l, w) = next(None)?;
            patches.push(Patch {
                center: num(l, w.first())?,
                half: num(l, w.get(1))?,
                ln_scale: num(l, w.get(2))?,
                x_interface: num(l, w.get(3))?,
                feature: tag(l, w.get(4))?,
            });
        }
        let (l, w) = next(Some("vertices"))?;
        let nv: usize = num(l, w.get(1))?;
        let mut vertices = Vec::with_capacity(nv);
        let mut charts = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, w) = next(None)?;
            vertices.push([num(l, w.first())?, num(l, w.get(1))?]);
            charts.push(match owner(l, w.get(2))? {
                None => None,
                Some(p) => Some((p, [num(l, w.get(3))?, num(l, w.get(4))?])),
            });
        }
        let (l, w) = next(Some("triangles"))?;
        let nt: usize = num(l, w.get(1))?;
        let mut triangles = Vec::with_capacity(nt);
        let mut triangle_patch = Vec::with_capacity(nt);
        let mut blends = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (l, w) = next(None)?;
            let t: [usize; 3] = [num(l, w.first())?, num(l, w.get(1))?, num(l, w.get(2))?];
            if t.iter().any(|&v| v >= nv) {
                return Err(MeshError::Parse { line: l, reason: "vertex index out of range".into() });
            }
            triangles.push(t);
            let p = owner(l, w.get(3))?;
            triangle_patch.push(p);
            blends.push(match w.get(4).map(String::as_str) {
                None => None,
                Some("blend") if p.is_some() => Some(Blend {
                    a: [num(l, w.get(5))?, num(l, w.get(6))?],
                    b: [num(l, w.get(7))?, num(l, w.get(8))?],
                    c: [num(l, w.get(9))?, num(l, w.get(10))?],
                }),
                Some(_) => return Err(MeshError::Parse { line: l, reason: "bad triangle suffix".into() }),
            });
        }
        let (l, w) = next(Some("boundary_edges"))?;
        let ne: usize = num(l, w.get(1))?;
        let mut boundary_edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (l, w) = next(None)?;
            let param = match w.get(6).map(String::as_str) {
                Some("linear") => EdgeParam::Linear,
                Some("cosh") => EdgeParam::Cosh { half: num(l, w.get(7))? },
                Some("cos") => EdgeParam::Cos { half: num(l, w.get(7))? },
                _ => return Err(MeshError::Parse { line: l, reason: "bad edge parametrization".into() }),
            };
            boundary_edges.push(BoundaryEdge {
                v: [num(l, w.first())?, num(l, w.get(1))?],
                base: num(l, w.get(2))?,
                t: [num(l, w.get(3))?, num(l, w.get(4))?],
                tag: tag(l, w.get(5))?,
                param,
            });
        }
        let mut mesh = Mesh {
            vertices,
            charts,
            triangles,
            triangle_patch,
            blends,
            patches,
            boundary_edges,
            length,
            h_max: 0.0,
        };
        mesh.compute_h_max();
        mesh.validate()?;
        Ok(mesh)
    }
}
