"""
Converts results files to learning-curve plots: test metric against the
number of labeled points, one line per file with a mean ± s.e.m. band.
"""

from pathlib import Path
import plotly.graph_objs as go
from results import read_results, records_frame


def curve_frame(records):
  """
  Seeds × labeled-count table of metrics. Batches of varying size give each
  seed its own labeled counts, so every seed carries its latest metric
  forward to the counts it skipped.
  """
  frame = records_frame(records).dropna(subset=["metric"])
  table = frame.pivot_table(index="seed", columns="labeled_count", values="metric")
  return table.ffill(axis=1)


def error_band(name, x, y, sem, hue, dash='solid', width=3):
  line_color = "hsla(" + hue + ",100%,40%,1)"
  error_band_color = "hsla(" + hue + ",100%,40%,0.125)"
  return [
      go.Scatter(
          name=name,
          x=x,
          y=y,
          line=dict(color=line_color, width=width, dash=dash),
          mode='lines',
      ),
      go.Scatter(
          name=name+"-upper",
          x=x,
          y=y + sem,
          mode='lines',
          marker=dict(color=error_band_color),
          line=dict(width=0),
          showlegend=False,
      ),
      go.Scatter(
          name=name+"-lower",
          x=x,
          y=y - sem,
          marker=dict(color=error_band_color),
          line=dict(width=0),
          mode='lines',
          fillcolor=error_band_color,
          fill='tonexty',
          showlegend=False,
      )
  ]


def learning_curves(paths, yaxis_title="Test metric"):
  figure = []
  line_dashes = ['solid', 'dot', 'dash', 'dashdot']
  paths = sorted(paths, key=lambda p: Path(p).stem)
  for i, path in enumerate(paths):
    df = curve_frame(read_results(path))
    x = list(df.columns)
    line_hue = str(int(360 * (i / len(paths))))
    line_dash = line_dashes[i] if len(paths) <= 4 else 'solid'
    y = df.mean(axis=0, numeric_only=True)
    sem = df.sem(axis=0, numeric_only=True).fillna(0.0)
    figure.extend(error_band(Path(path).stem, x, y, sem, line_hue, line_dash))
  plotly_fig = go.Figure(figure)
  plotly_fig.update_layout(
      font=dict(size=18),
      margin=dict(l=20, r=20, t=20, b=20),
      legend=dict(
          yanchor="top",
          y=0.99,
          xanchor="right",
          x=0.99
      ),
      yaxis_title=yaxis_title,
      xaxis_title="Labeled points",
  )
  return plotly_fig
