//! Minimal static SVG bar-chart rendering. No scripts, no external assets.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;

pub(crate) struct BarChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// (bar label, value) pairs, drawn left to right.
    pub bars: Vec<(String, f64)>,
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e4).contains(&a) {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

impl BarChart {
    /// Renders the chart as a standalone SVG document. Bar heights scale
    /// linearly with value; non-positive values draw as zero-height bars but
    /// keep their signed value label. Exactly one `<rect>` per bar.
    pub fn render(&self) -> String {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let baseline = MARGIN_TOP + plot_h;
        let max = self
            .bars
            .iter()
            .map(|(_, v)| *v)
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);

        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        s.push_str(&format!(
            "  <title>{}</title>\n",
            xml_escape(&self.title)
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            xml_escape(&self.title)
        ));

        // Axes.
        s.push_str(&format!(
            "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" \
             y2=\"{baseline}\" stroke=\"black\"/>\n"
        ));
        s.push_str(&format!(
            "  <line x1=\"{MARGIN_LEFT}\" y1=\"{baseline}\" x2=\"{:.1}\" y2=\"{baseline}\" \
             stroke=\"black\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">0</text>\n",
            MARGIN_LEFT - 6.0,
            baseline + 4.0
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            MARGIN_TOP + 4.0,
            xml_escape(&fmt_value(max))
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 16.0,
            xml_escape(&self.x_label)
        ));
        s.push_str(&format!(
            "  <text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\" transform=\"rotate(-90 20 {:.1})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            xml_escape(&self.y_label)
        ));

        let n = self.bars.len().max(1) as f64;
        let slot = plot_w / n;
        let bar_w = slot * 0.7;
        for (i, (label, value)) in self.bars.iter().enumerate() {
            let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
            let h = if *value > 0.0 {
                (value / max) * plot_h
            } else {
                0.0
            };
            let y = baseline - h;
            s.push_str(&format!(
                "  <rect class=\"bar\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" \
                 height=\"{h:.2}\" fill=\"#4878a8\"/>\n"
            ));
            s.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
                 font-family=\"sans-serif\" font-size=\"9\">{}</text>\n",
                x + bar_w / 2.0,
                y - 4.0,
                xml_escape(&fmt_value(*value))
            ));
            s.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
                 font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
                x + bar_w / 2.0,
                baseline + 16.0,
                xml_escape(label)
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(values: &[f64]) -> BarChart {
        BarChart {
            title: "t".to_string(),
            x_label: "x".to_string(),
            y_label: "y".to_string(),
            bars: values
                .iter()
                .enumerate()
                .map(|(i, v)| (i.to_string(), *v))
                .collect(),
        }
    }

    #[test]
    fn one_rect_per_bar() {
        let svg = chart(&[1.0, 2.0, 3.0, 4.0]).render();
        assert_eq!(svg.matches("<rect").count(), 4);
        assert_eq!(svg.matches("class=\"bar\"").count(), 4);
    }

    #[test]
    fn has_dimensions_viewbox_and_no_scripts() {
        let svg = chart(&[1.0]).render();
        assert!(svg.contains("width=\"640\""));
        assert!(svg.contains("height=\"400\""));
        assert!(svg.contains("viewBox=\"0 0 640 400\""));
        assert!(!svg.contains("<script"));
    }

    #[test]
    fn tallest_bar_fills_the_plot_height() {
        let svg = chart(&[5.0, 10.0]).render();
        // plot height = 400 - 48 - 64 = 288; the max bar reaches it exactly.
        assert!(svg.contains("height=\"288.00\""));
        assert!(svg.contains("height=\"144.00\""));
    }

    #[test]
    fn non_positive_values_draw_flat_but_keep_signed_labels() {
        let svg = chart(&[-0.25, 0.0, 1.0]).render();
        assert_eq!(svg.matches("height=\"0.00\"").count(), 2);
        assert!(svg.contains(">-0.2500<"));
        assert!(svg.contains(">0.0000<"));
    }

    #[test]
    fn value_labels_switch_to_scientific_outside_plain_range() {
        assert_eq!(fmt_value(0.72), "0.7200");
        assert_eq!(fmt_value(1234.5), "1234.5000");
        assert_eq!(fmt_value(3.2e19), "3.200e19");
        assert_eq!(fmt_value(-4.0e-7), "-4.000e-7");
        assert_eq!(fmt_value(0.0), "0.0000");
    }

    #[test]
    fn escapes_markup_in_labels() {
        let mut c = chart(&[1.0]);
        c.title = "a<b & \"c\"".to_string();
        let svg = c.render();
        assert!(svg.contains("a&lt;b &amp; &quot;c&quot;"));
        assert!(!svg.contains("a<b"));
    }

    #[test]
    fn tags_are_balanced() {
        let svg = chart(&[1.0, 2.0]).render();
        assert_eq!(svg.matches("<svg").count(), 1);
        assert_eq!(svg.matches("</svg>").count(), 1);
        let opens = svg.matches("<text").count();
        assert_eq!(svg.matches("</text>").count(), opens);
        // every rect and line is self-closing
        assert_eq!(svg.matches("<rect").count(), svg.matches("/>\n").count() - 2);
    }
}
