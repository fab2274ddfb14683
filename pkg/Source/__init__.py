"""
bidyn: точная арифметика бирациональных отображений плоскости, раздутий,
флопов и индуцированных отображений на исключительных дивизорах.
"""

import sys
from pathlib import Path

# модули импортируют друг друга по плоским именам
sys.path.insert(0, str(Path(__file__).parent))

from cli import run
from fixtures import MapCatalog, default_catalog
from ratmap import ProjPoint, ProjRatMap

__all__ = ['MapCatalog', 'ProjPoint', 'ProjRatMap', 'default_catalog', 'run']
