# Description: Fixed width report tables shared by the fit, cv and simulate reports
# Date: 15-03-2024

import numpy as np

RULE = "+---------------------------------------------------------------+"

def format_row(description, value, error=None) -> str:
    """One table line, '| description : value error |'."""
    description = str(description)[:40]
    if isinstance(value, str):
        return "| %-40s : %18s |" % (description, value[:18])
    value_txt = _number(value)
    error_txt = _number(error) if error is not None else ''
    return "| %-40s : %9s %8s |" % (description, value_txt, error_txt)

def _number(value) -> str:
    if value is None:
        return ''
    if isinstance(value, str):
        return value[:9]
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(value)
    if not np.isfinite(value):
        return 'nan' if np.isnan(value) else ('inf' if value > 0 else '-inf')
    if abs(value) >= 1e5:
        return "%.3e" % value
    return "%.4f" % value

def format_table(title, rows, header="description                               value    error") -> str:
    """Title, column header and the rows between two rules."""
    lines = [title, "=" * len(RULE), header, RULE]
    lines.extend(row.rstrip() for row in rows)
    lines.append(RULE)
    return '\n'.join(lines)

def format_grid(title, row_labels, col_labels, values, row_header='') -> str:
    """Matrix report (rows such as DGP/n, one column per method), 4 decimals."""
    width = max([len(str(c)) for c in col_labels] + [10])
    label_width = max([len(str(r)) for r in row_labels] + [len(row_header), 8])
    head = row_header.ljust(label_width) + ''.join(str(c).rjust(width + 2) for c in col_labels)
    lines = [title, "=" * len(head), head, "-" * len(head)]
    for label, row in zip(row_labels, values):
        cells = ''.join(_number(v).rjust(width + 2) if v is not None else '-'.rjust(width + 2) for v in row)
        lines.append(str(label).ljust(label_width) + cells)
    lines.append("-" * len(head))
    return '\n'.join(lines)
