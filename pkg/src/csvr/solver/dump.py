# Description: Plain text dump of a ConicProgram for cross-checking with external solvers
# Date: 08-03-2024

"""
Format (one record per line, '#' starts a comment line):

    csvr-program 1
    dims <num_vars> <num_rows> <num_balls>
    P <nnz>            followed by nnz lines "<row> <col> <value>" (0-based)
    A <nnz>            followed by nnz lines "<row> <col> <value>"
    q                  followed by num_vars values, one per line
    l                  followed by num_rows values ('inf'/'-inf' allowed)
    u                  followed by num_rows values
    ball <radius> <k> <i_1> ... <i_k>      one line per ball block
    block <name> <start> <stop>            one line per named variable block
"""

import numpy as np
import scipy.sparse as spspa

from ..core import DataFormatError
from .program import BallBlock, ConicProgram

MAGIC = 'csvr-program'
VERSION = 1

def _fmt(value):
    return repr(float(value))

def dump_program(program: ConicProgram, path) -> None:
    lines = [f"{MAGIC} {VERSION}", f"dims {program.num_vars} {program.num_rows} {len(program.ball_blocks)}"]
    for label, mat in (('P', program.p), ('A', program.a)):
        coo = mat.tocoo()
        lines.append(f"{label} {coo.nnz}")
        lines.extend(f"{i} {j} {_fmt(v)}" for i, j, v in zip(coo.row, coo.col, coo.data))
    for label, vec in (('q', program.q), ('l', program.l), ('u', program.u)):
        lines.append(label)
        lines.extend(_fmt(v) for v in vec)
    for ball in program.ball_blocks:
        lines.append(f"ball {_fmt(ball.radius)} {len(ball.indices)} " + ' '.join(str(i) for i in ball.indices))
    for name, block in program.var_names.items():
        lines.append(f"block {name} {block.start} {block.stop}")
    with open(path, 'w') as fp:
        fp.write('\n'.join(lines) + '\n')

def load_program(path) -> ConicProgram:
    try:
        with open(path, 'r') as fp:
            lines = [line.strip() for line in fp if line.strip() and not line.startswith('#')]
    except OSError as exc:
        raise DataFormatError(f"cannot read program file {path}: {exc}") from exc

    try:
        head = lines[0].split()
        if head[0] != MAGIC or int(head[1]) != VERSION:
            raise DataFormatError(f"{path} is not a csvr program dump")
        _, nvar, nrow, nball = lines[1].split()
        nvar, nrow, nball = int(nvar), int(nrow), int(nball)
        pos = 2

        def read_triplets(label, shape):
            nonlocal pos
            tag, nnz = lines[pos].split()
            if tag != label:
                raise DataFormatError(f"expected section {label}, found '{tag}'")
            nnz = int(nnz)
            rows = np.array([line.split() for line in lines[pos + 1:pos + 1 + nnz]], dtype=float).reshape(-1, 3)
            pos += 1 + nnz
            return spspa.csc_matrix((rows[:, 2], (rows[:, 0].astype(int), rows[:, 1].astype(int))), shape=shape)

        def read_vector(label, length):
            nonlocal pos
            if lines[pos] != label:
                raise DataFormatError(f"expected section {label}, found '{lines[pos]}'")
            values = np.array(lines[pos + 1:pos + 1 + length], dtype=float)
            pos += 1 + length
            return values

        p = read_triplets('P', (nvar, nvar))
        a = read_triplets('A', (nrow, nvar))
        q = read_vector('q', nvar)
        l = read_vector('l', nrow)
        u = read_vector('u', nrow)

        balls, blocks = [], {}
        for line in lines[pos:]:
            fields = line.split()
            if fields[0] == 'ball':
                k = int(fields[2])
                balls.append(BallBlock(np.array(fields[3:3 + k], dtype=int), float(fields[1])))
            elif fields[0] == 'block':
                blocks[fields[1]] = slice(int(fields[2]), int(fields[3]))
            else:
                raise DataFormatError(f"unrecognised record '{fields[0]}'")
        if len(balls) != nball:
            raise DataFormatError(f"header announces {nball} balls, found {len(balls)}")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, DataFormatError):
            raise
        raise DataFormatError(f"malformed program file {path}: {exc}") from exc

    return ConicProgram(p, q, a, l, u, ball_blocks=tuple(balls), var_names=blocks)
