//! Plot scripts written next to the CSV files they read.

/// Python script plotting `y_cols` against `x_col`; `log_y` switches to a log₂ axis.
pub fn script(csv_name: &str, x_col: &str, y_cols: &[&str], log_y: bool, title: &str) -> String {
    let ys = y_cols.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(", ");
    format!(
        r#"import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name:?}
with open(path, newline="") as fh:
    rows = list(csv.reader(fh))[1:]
head, body = rows[0], rows[1:]
col = {{name: i for i, name in enumerate(head)}}
x = [float(r[col[{x_col:?}]]) for r in body]
for name in [{ys}]:
    y = [abs(float(r[col[name]])) if {log} else float(r[col[name]]) for r in body]
    plt.plot(x, y, "o-", label=name)
if {log}:
    plt.yscale("log", base=2)
plt.xlabel({x_col:?})
plt.title({title:?})
plt.legend()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
"#,
        log = if log_y { "True" } else { "False" },
    )
}
