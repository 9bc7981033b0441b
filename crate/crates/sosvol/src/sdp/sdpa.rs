//! Export in the SDPA sparse format (".dat-s") for cross-checking against
//! external solvers.
//!
//! SDPA states `min c' x  s.t.  X = sum_i x_i F_i - F_0, X >= 0`. The export
//! maps this problem's `maximize b' y  s.t.  C - sum y_j A_j >= 0` by
//! writing `c = -b`, `F_0 = -C`, `F_i = -A_i`; the SDPA optimal value is the
//! negative of this problem's optimum. Block and entry numbering is 1-based,
//! diagonal blocks are written with negative size, and only upper-triangle
//! nonzeros are emitted.

use std::io::{self, Write};

use super::block::Block;
use super::{BlockSpec, SdpProblem};

pub fn write_sdpa_sparse<W: Write>(problem: &SdpProblem, out: &mut W) -> io::Result<()> {
    writeln!(out, "\"objective sign flipped: SDPA minimizes\"")?;
    writeln!(out, "{}", problem.num_vars())?;
    writeln!(out, "{}", problem.blocks.len())?;
    let sizes: Vec<String> = problem
        .blocks
        .iter()
        .map(|b| match b {
            BlockSpec::Dense(n) => format!("{n}"),
            BlockSpec::Diag(n) => format!("-{n}"),
        })
        .collect();
    writeln!(out, "{}", sizes.join(" "))?;
    let costs: Vec<String> = problem.objective.iter().map(|v| format_float(-v)).collect();
    writeln!(out, "{}", costs.join(" "))?;
    write_matrix(out, 0, &problem.constant.blocks, -1.0)?;
    for (j, a) in problem.constraints.iter().enumerate() {
        write_matrix(out, j + 1, &a.blocks, -1.0)?;
    }
    Ok(())
}

fn write_matrix<W: Write>(
    out: &mut W,
    matno: usize,
    blocks: &[Block],
    sign: f64,
) -> io::Result<()> {
    for (bi, block) in blocks.iter().enumerate() {
        match block {
            Block::Dense(m) => {
                for i in 0..m.nrows() {
                    for j in i..m.ncols() {
                        let v = sign * m[(i, j)];
                        if v != 0.0 {
                            writeln!(
                                out,
                                "{} {} {} {} {}",
                                matno,
                                bi + 1,
                                i + 1,
                                j + 1,
                                format_float(v)
                            )?;
                        }
                    }
                }
            }
            Block::Diag(d) => {
                for i in 0..d.len() {
                    let v = sign * d[i];
                    if v != 0.0 {
                        writeln!(
                            out,
                            "{} {} {} {} {}",
                            matno,
                            bi + 1,
                            i + 1,
                            i + 1,
                            format_float(v)
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn format_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{:.1}", v)
    } else {
        format!("{:.16e}", v)
    }
}
