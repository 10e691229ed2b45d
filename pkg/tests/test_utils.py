import os
import io
import pickle
import unittest
from unittest import mock

from hestonvar.utils import Struct, Enum, worker_count, fmt_float, opened, HestonvarError
from hestonvar.utils.base import THREADS_ENV


class Point(Struct):
    __slots__ = ('x', 'y', 'label')

    @classmethod
    def _defaults(cls):
        return {'label': 'origin'}

    def _validate(self):
        if self.x < 0:
            raise ValueError("x must be non-negative")


class Color(Enum):
    red = 1
    dark_blue = 2

    __aliases__ = {"dark-blue": "dark_blue"}


class StructTest(unittest.TestCase):
    def test_defaults_and_equality(self):
        a = Point(1.0, 2.0)
        self.assertEqual(a.label, 'origin')
        self.assertEqual(a, Point(x=1.0, y=2.0, label='origin'))
        self.assertNotEqual(a, Point(1.0, 3.0))
        self.assertEqual(hash(a), hash(Point(1.0, 2.0)))

    def test_immutable(self):
        a = Point(1.0, 2.0)
        with self.assertRaises(AttributeError):
            a.x = 3.0

    def test_validation(self):
        self.assertRaises(ValueError, Point, -1.0, 0.0)
        self.assertRaises(TypeError, Point, 1.0)
        self.assertRaises(TypeError, Point, 1.0, 2.0, z=3)
        self.assertRaises(TypeError, Point, 1.0, 2.0, 'a', 'b')

    def test_replace_and_dict(self):
        a = Point(1.0, 2.0)
        b = a._replace(y=5.0)
        self.assertEqual(b.y, 5.0)
        self.assertEqual(a.y, 2.0)
        self.assertEqual(Point.from_dict(a.to_dict()), a)
        self.assertRaises(ValueError, a._replace, x=-2.0)

    def test_pickle(self):
        a = Point(1.0, 2.0, 'p')
        self.assertEqual(pickle.loads(pickle.dumps(a)), a)


class EnumTest(unittest.TestCase):
    def test_translate(self):
        self.assertIs(Color['red'], Color.red)
        self.assertIs(Color(2), Color.dark_blue)
        self.assertIs(Color['dark-blue'], Color.dark_blue)
        self.assertEqual(Color.red, 'red')
        self.assertEqual(Color.red, 1)
        self.assertEqual(str(Color.dark_blue), 'dark_blue')
        self.assertRaises(KeyError, Color.translate, 'green')
        self.assertIn('dark-blue', Color)
        self.assertNotIn('green', Color)

    def test_iteration(self):
        self.assertEqual(sorted(c.name for c in Color), ['dark_blue', 'red'])

    def test_pickle(self):
        self.assertIs(pickle.loads(pickle.dumps(Color.red)), Color.red)


class HelperTest(unittest.TestCase):
    def test_worker_count(self):
        with mock.patch.dict(os.environ, {THREADS_ENV: '2'}):
            self.assertEqual(worker_count(8), 2)
            self.assertEqual(worker_count(1), 1)
            self.assertEqual(worker_count(), 2)
        with mock.patch.dict(os.environ, {THREADS_ENV: 'many'}):
            self.assertRaises(HestonvarError, worker_count)
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(worker_count(3), 3)
            self.assertEqual(worker_count(0), 1)
            self.assertGreaterEqual(worker_count(), 1)
            self.assertLessEqual(worker_count(cap=2), 2)

    def test_fmt_float(self):
        self.assertEqual(fmt_float(0.1), '0.1')
        self.assertEqual(float(fmt_float(1.0 / 3.0)), 1.0 / 3.0)

    def test_opened_leaves_handles_open(self):
        buf = io.StringIO()
        with opened(buf, 'w') as handle:
            handle.write("x")
        self.assertFalse(buf.closed)
        self.assertEqual(buf.getvalue(), "x")


if __name__ == '__main__':
    unittest.main()
