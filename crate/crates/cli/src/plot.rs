//! Generated matplotlib scripts for the emitted CSV files.

use std::fmt::Write as _;

/// One panel: columns `x` against each of `ys` from `file`, optionally split by a text column.
#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub file: String,
    pub x: String,
    pub ys: Vec<String>,
    pub group: Option<String>,
    pub log_x: bool,
    pub log_y: bool,
}

impl Panel {
    pub fn new(title: &str, file: &str, x: &str, ys: &[&str]) -> Self {
        Self {
            title: title.into(),
            file: file.into(),
            x: x.into(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            group: None,
            log_x: false,
            log_y: false,
        }
    }

    pub fn grouped(mut self, column: &str) -> Self {
        self.group = Some(column.into());
        self
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }
}

fn py_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("{s:?}")).collect();
    format!("[{}]", quoted.join(", "))
}

/// Script that draws every panel into `<stem>.png` next to the CSV files.
pub fn script(stem: &str, panels: &[Panel]) -> String {
    let mut s = String::new();
    s.push_str(
        "#!/usr/bin/env python3\n\
         import csv\n\
         import os\n\
         from collections import defaultdict\n\n\
         import matplotlib\n\
         matplotlib.use(\"Agg\")\n\
         import matplotlib.pyplot as plt\n\n\
         HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n\
         def load(name):\n\
         \x20   with open(os.path.join(HERE, name), newline=\"\") as fh:\n\
         \x20       return list(csv.DictReader(fh))\n\n\n\
         def draw(ax, rows, x, ys, group, title, log_x, log_y):\n\
         \x20   groups = defaultdict(list)\n\
         \x20   for r in rows:\n\
         \x20       groups[r[group] if group else \"\"].append(r)\n\
         \x20   for key, part in groups.items():\n\
         \x20       xs = [float(r[x]) for r in part]\n\
         \x20       for y in ys:\n\
         \x20           label = f\"{key} {y}\".strip()\n\
         \x20           ax.plot(xs, [float(r[y]) for r in part], label=label)\n\
         \x20   if log_x:\n\
         \x20       ax.set_xscale(\"log\")\n\
         \x20   if log_y:\n\
         \x20       ax.set_yscale(\"log\")\n\
         \x20   ax.set_xlabel(x)\n\
         \x20   ax.set_title(title)\n\
         \x20   ax.legend(fontsize=\"small\")\n\n\n",
    );
    s.push_str("PANELS = [\n");
    for p in panels {
        let group = p.group.as_ref().map_or("None".to_string(), |g| format!("{g:?}"));
        let _ = writeln!(
            s,
            "    ({:?}, {:?}, {:?}, {}, {}, {}, {}),",
            p.title,
            p.file,
            p.x,
            py_list(&p.ys),
            group,
            if p.log_x { "True" } else { "False" },
            if p.log_y { "True" } else { "False" },
        );
    }
    s.push_str("]\n\n");
    let _ = write!(
        s,
        "if __name__ == \"__main__\":\n\
         \x20   fig, axes = plt.subplots(len(PANELS), 1, figsize=(7, 3.5 * len(PANELS)), squeeze=False)\n\
         \x20   for ax, (title, name, x, ys, group, log_x, log_y) in zip(axes[:, 0], PANELS):\n\
         \x20       draw(ax, load(name), x, ys, group, title, log_x, log_y)\n\
         \x20   fig.tight_layout()\n\
         \x20   fig.savefig(os.path.join(HERE, {:?}))\n",
        format!("{stem}.png")
    );
    s
}
