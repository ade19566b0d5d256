#!/usr/bin/env python3
"""
Static HTML Report Generator for srvolume analysis results

This script turns a machine report (the JSON written by `sr_cli.py ... --out`)
into a standalone HTML page. It includes:
- Manifest summary (frame, volume, parameters)
- One table per report section, with provenance badges
- Log-log plots of the probe series (embedded in HTML)
- Probe series as downloadable CSV

Usage:
    python generate_static_report.py <report.json> [--output report.html]

Requirements:
    - Pandas for data handling
    - Plotly for interactive plots
"""

import sys
import argparse
import base64
import html
import json
import time
import webbrowser
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd
import plotly.graph_objects as go
import plotly.offline as pyo

PROVENANCE_COLORS = {
    'exact': '#28a745',
    'sampled': '#fd7e14',
    'probe': '#6f42c1',
}

# x column, y column and axis labels of each probe series
PROBE_AXES = {
    'probe-dimension': ('epsilon', 'log_cells', 'grid scale epsilon', 'log occupied cells'),
    'probe-finiteness': ('delta', 'integral', 'tube width delta', 'I(delta)'),
}


class StaticAnalysisReportGenerator:
    """Generates static HTML reports from srvolume machine reports."""

    def __init__(self, report_file: str):
        self.report_file = Path(report_file)

        self.document: Dict[str, Any] = {}
        self.sections: List[Dict[str, Any]] = []
        self.csv_data_b64: Dict[str, str] = {}

    def load_data(self):
        """Load the machine report."""
        print(f"Loading report from: {self.report_file}")
        if not self.report_file.exists():
            raise FileNotFoundError(f"No report file found at {self.report_file}")
        with open(self.report_file, 'r', encoding='utf-8') as f:
            self.document = json.load(f)
        if 'sections' not in self.document or 'tool' not in self.document:
            raise ValueError(f"{self.report_file} is not an srvolume machine report")
        self.sections = self.document['sections']
        print(f"  {len(self.sections)} sections, status {self.document.get('status', 'unknown')}")

        for index, section in enumerate(self.sections):
            rows = section.get('tables', {}).get('series')
            if section['kind'] in PROBE_AXES and rows:
                csv_content = pd.DataFrame(rows).to_csv(index=False).encode('utf-8')
                self.csv_data_b64[f"{index}"] = base64.b64encode(csv_content).decode('utf-8')

    @staticmethod
    def _value_html(item: Any) -> str:
        if isinstance(item, dict) and 'provenance' in item:
            value = item['value']
            color = PROVENANCE_COLORS.get(item['provenance'], '#6c757d')
            badge = f'<span class="badge" style="background-color: {color};">{item["provenance"]}</span>'
        else:
            value, badge = item, ''
        if isinstance(value, list):
            text = ', '.join(str(v) for v in value) if value else '-'
        elif isinstance(value, dict):
            text = '<br>'.join(f'{html.escape(str(k))} = {html.escape(str(v))}' for k, v in value.items()) or '-'
            return f'{text} {badge}'
        else:
            text = str(value)
        return f'{html.escape(text)} {badge}'

    def create_section_html(self, index: int, section: Dict[str, Any]) -> str:
        """Fields table, section tables and, for probes, a plot."""
        rows = ''.join(
            f'<tr><td><strong>{html.escape(key)}</strong></td><td>{self._value_html(item)}</td></tr>'
            for key, item in section.get('fields', {}).items())
        tables = []
        for name, table_rows in section.get('tables', {}).items():
            if not table_rows or name == 'series':
                continue
            frame = pd.DataFrame(table_rows)
            tables.append(f'<h4>{html.escape(name)}</h4>' +
                          frame.to_html(index=False, classes='results-table', border=0))
        plot = ''
        if section['kind'] in PROBE_AXES and section.get('tables', {}).get('series'):
            plot = self.create_probe_plot(section)
        banner = ' inconclusive' if section.get('inconclusive') else ''
        download = self.create_csv_link(index, section)
        return f'''
        <div class="plot-section{banner}">
            <h3>{html.escape(section['title'])}</h3>
            <div class="plot-wrapper">
                <table class="results-table">
                    <tbody>{rows}</tbody>
                </table>
                {''.join(tables)}
                {plot}
                {download}
            </div>
        </div>
        '''

    def create_probe_plot(self, section: Dict[str, Any]) -> str:
        """Log-log plot of a probe series."""
        x_col, y_col, x_label, y_label = PROBE_AXES[section['kind']]
        data = pd.DataFrame(section['tables']['series'])
        print(f"Creating plot for {section['title']} ({len(data)} points)")
        fig = go.Figure()
        fig.add_trace(go.Scatter(
            x=data[x_col],
            y=data[y_col],
            mode='lines+markers',
            name=y_label,
            line=dict(color='#1f77b4', width=2),
            marker=dict(size=6)
        ))
        if section['kind'] == 'probe-dimension':
            slope = section['fields'].get('exponent', {}).get('value')
            if isinstance(slope, (int, float)):
                # log N = c + slope * log(1/epsilon), fitted scales only
                fitted = data[data['fitted']] if 'fitted' in data else data
                x = -np.log(fitted[x_col].to_numpy())
                intercept = float(np.mean(fitted[y_col].to_numpy() - slope * x))
                fig.add_trace(go.Scatter(x=fitted[x_col], y=intercept + slope * x, mode='lines',
                                         name=f'fit, slope {slope:.3f}',
                                         line=dict(color='#d62728', dash='dash')))
            fig.update_xaxes(type='log')
        else:
            fig.update_xaxes(type='log', autorange='reversed')
        fig.update_layout(
            title=section['title'],
            xaxis_title=x_label,
            yaxis_title=y_label,
            template='plotly_white',
            height=400,
            showlegend=True
        )
        return pyo.plot(fig, output_type='div', include_plotlyjs='inline')

    def create_csv_link(self, index: int, section: Dict[str, Any]) -> str:
        csv_b64 = self.csv_data_b64.get(f"{index}")
        if not csv_b64:
            return ''
        filename = f"{section['kind']}_{index}.csv"
        return f'''
                <a href="data:text/csv;base64,{csv_b64}" download="{filename}" class="download-btn">
                    Download series CSV
                </a>
        '''

    def create_manifest_html(self) -> str:
        manifest = self.document.get('manifest', {})
        frame_rows = ''.join(
            f'<tr><td><strong>{html.escape(name)}</strong></td><td>{html.escape(", ".join(comps))}</td></tr>'
            for name, comps in manifest.get('frame', {}).items())
        parameters = manifest.get('parameters') or {}
        return f'''
        <div class="info-section">
            <h3>Manifest</h3>
            <p><strong>Name:</strong> {html.escape(str(manifest.get('name', 'Unknown')))}</p>
            <p><strong>Dimension:</strong> {manifest.get('dimension', '?')}
               &nbsp; <strong>Rank:</strong> {manifest.get('rank', '?')}</p>
            <p><strong>Volume density:</strong> {html.escape(str(manifest.get('volume', '1')))}</p>
            <p><strong>Parameters:</strong> {html.escape(str(parameters)) if parameters else 'none'}</p>
            <table class="results-table">
                <thead><tr><th>Field</th><th>Components</th></tr></thead>
                <tbody>{frame_rows}</tbody>
            </table>
        </div>
        '''

    def generate_html_report(self, output_file: str = "analysis_report.html"):
        """Generate the static HTML report."""
        tool = self.document.get('tool', {})
        status = self.document.get('status', 'unknown')
        html_template = """
<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>srvolume Analysis Report</title>
    <style>
        body {{ font-family: 'Segoe UI', Tahoma, sans-serif; margin: 0; padding: 20px; background: #f5f5f5; }}
        .container {{ max-width: 1200px; margin: 0 auto; background: white; padding: 30px; border-radius: 10px; }}
        .header {{ text-align: center; border-bottom: 3px solid #1f77b4; padding-bottom: 20px; margin-bottom: 30px; }}
        .header h1 {{ color: #1f77b4; margin: 0; }}
        .header h2 {{ color: #666; margin: 5px 0 0 0; font-weight: normal; }}
        .info-section {{ background: #f8f9fa; padding: 15px; border-radius: 5px; margin-bottom: 30px; }}
        .info-section h3 {{ margin-top: 0; color: #495057; }}
        .results-table {{ width: 100%; border-collapse: collapse; margin-bottom: 20px; }}
        .results-table th, .results-table td {{ padding: 8px 12px; text-align: left; border-bottom: 1px solid #ddd; }}
        .results-table th {{ background: #1f77b4; color: white; }}
        .plot-section {{ margin-bottom: 30px; border: 1px solid #ddd; border-radius: 5px; overflow: hidden; }}
        .plot-section h3 {{ background: #1f77b4; color: white; padding: 10px 15px; margin: 0; }}
        .plot-section.inconclusive h3 {{ background: #fd7e14; }}
        .plot-wrapper {{ padding: 10px; }}
        .badge {{ color: white; border-radius: 3px; padding: 1px 6px; font-size: 0.75em; margin-left: 6px; }}
        .status {{ font-weight: bold; color: {status_color}; }}
        .download-btn {{ display: inline-block; background: #28a745; color: white; padding: 10px 15px;
                         text-decoration: none; border-radius: 5px; margin-top: 10px; }}
        .footer {{ text-align: center; margin-top: 50px; padding-top: 20px; border-top: 1px solid #ddd; color: #666; }}
    </style>
</head>
<body>
    <div class="container">
        <div class="header">
            <h1>srvolume Analysis Report</h1>
            <h2>{command} on {manifest_name}</h2>
        </div>

        <div class="info-section">
            <p><strong>Report file:</strong> {report_file}</p>
            <p><strong>Status:</strong> <span class="status">{status}</span></p>
        </div>

        {manifest_section}

        {sections}

        <div class="footer">
            <p>Generated by {tool_name} {tool_version}</p>
            <p>Report created on {generation_time}</p>
        </div>
    </div>
</body>
</html>
        """

        sections_html = ''.join(self.create_section_html(i, s) for i, s in enumerate(self.sections))

        html_content = html_template.format(
            status_color='#fd7e14' if status == 'inconclusive' else '#28a745',
            command=html.escape(str(self.document.get('command', '?'))),
            manifest_name=html.escape(str(self.document.get('manifest', {}).get('name', '?'))),
            report_file=html.escape(str(self.report_file)),
            status=status,
            manifest_section=self.create_manifest_html(),
            sections=sections_html,
            tool_name=tool.get('name', 'srvolume'),
            tool_version=tool.get('version', '?'),
            generation_time=time.strftime('%Y-%m-%d %H:%M:%S')
        )

        output_path = Path(output_file)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(html_content)

        print(f"Static HTML report generated: {output_path.absolute()}")
        return output_path


def main(argv=None):
    """Main execution function."""

    parser = argparse.ArgumentParser(
        description="Generate static HTML report from an srvolume machine report",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python sr_cli.py verdict manifests/martinet.yml --out martinet.json
  python generate_static_report.py martinet.json
  python generate_static_report.py martinet.json --output martinet.html --no-browser
        """
    )

    parser.add_argument(
        "report_file",
        help="Machine report (JSON) written by sr_cli.py --out"
    )

    parser.add_argument(
        "-o", "--output",
        default="analysis_report.html",
        help="Output HTML file name (default: analysis_report.html)"
    )

    parser.add_argument(
        "--no-browser",
        action="store_true",
        help="Don't automatically open browser"
    )

    args = parser.parse_args(argv)

    try:
        print("srvolume - Static HTML Report Generator")
        print("=" * 40)

        generator = StaticAnalysisReportGenerator(args.report_file)
        generator.load_data()
        report_path = generator.generate_html_report(args.output)

        print("\nReport generation completed successfully!")
        print(f"HTML Report: {report_path}")

        if not args.no_browser:
            print("\nOpening report in browser...")
            webbrowser.open(f"file://{report_path.absolute()}")

    except Exception as e:
        print(f"Error generating report: {e}")
        import traceback
        traceback.print_exc()
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
