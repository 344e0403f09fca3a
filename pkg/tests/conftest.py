"""
测试配置文件，包含测试用的fixture
"""
import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from tensorthreshold.exact_algebra.polynomial import Polynomial, monomial_from_indices
from tensorthreshold.exact_algebra.quadratic import QuadraticForm
from tensorthreshold.harness.library import library
from tensorthreshold.harness.models import LibraryStatus
from tensorthreshold.numopt.models import AscentConfig
from tensorthreshold.reduce_box.service import compile_homogeneous
from tensorthreshold.reduce_tensor.models import HqsfInstance
from tensorthreshold.reduce_tensor.service import build_quartic


@pytest.fixture(scope="session")
def lib():
    """全部库实例 {名称: 实例}"""
    return library()


@pytest.fixture(scope="session")
def yes_instances(lib):
    return [inst for inst in lib.values() if inst.status == LibraryStatus.YES]


@pytest.fixture(scope="session")
def no_instances(lib):
    return [inst for inst in lib.values() if inst.status == LibraryStatus.NO]


@pytest.fixture(scope="session")
def compiled(lib):
    """库实例的齐次系统 {名称: (系统, 布局)}"""
    return {name: compile_homogeneous(inst.bq4e) for name, inst in lib.items()}


@pytest.fixture
def cfg():
    """小规模数值配置"""
    return AscentConfig(restarts=12, max_iters=400, seed=7)


@pytest.fixture(scope="session")
def pipeline_cfg():
    """流水线测试使用的数值配置"""
    return AscentConfig(restarts=10, max_iters=400, seed=11)


@pytest.fixture
def rng():
    """固定种子的随机数发生器"""
    return random.Random(20240601)


@pytest.fixture(scope="session")
def saddle_hqsf():
    """单个二次型 diag(1, -1)，公共零点 (1, 1)"""
    return HqsfInstance(N=2, forms=(QuadraticForm.diagonal([1, -1]),))


@pytest.fixture(scope="session")
def saddle_quartic(saddle_hqsf):
    """diag(1, -1) 的四次证书数据，B = 3"""
    return build_quartic(saddle_hqsf)


@pytest.fixture
def sample_rational(rng):
    """随机有理数采样函数"""
    def sample(bound: int = 5, max_den: int = 4) -> Fraction:
        return Fraction(rng.randint(-bound, bound), rng.randint(1, max_den))
    return sample


@pytest.fixture
def random_form(rng, sample_rational):
    """随机稀疏齐次型采样函数：terms 个随机单项式，系数为随机有理数"""
    def sample(n: int, d: int, terms: int = 4) -> Polynomial:
        coefficients = {}
        for _ in range(terms):
            monomial = monomial_from_indices(sorted(rng.randrange(n) for _ in range(d)))
            coefficients[monomial] = coefficients.get(monomial, Fraction(0)) + sample_rational()
        return Polynomial(n, coefficients)
    return sample
