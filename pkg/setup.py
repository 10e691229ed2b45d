from setuptools import setup, find_packages


with open("src/hestonvar/version.py") as version_file:
    version = None
    for line in version_file.readlines():
        if "version = " in line:
            version = line.split(" = ")[1].replace("\"", "").strip()
            break
    else:
        print("Cannot determine version")

long_description = ''
try:
    with open("README.rst") as readme_file:
        long_description = readme_file.read()
except Exception:
    pass


required = ["numpy>=1.17", "scipy>=1.4", "hjson", "six"]


extras = {
    'test': ["pytest", "pytest-cov", "coverage"],
}

extras['all'] = list({d for extra in extras.values() for d in extra})


setup(
    name='hestonvar',
    version=version,
    packages=find_packages(where='src'),
    package_dir={"": 'src'},
    include_package_data=True,
    package_data={
        "hestonvar": ["data/*.hjson"],
    },
    install_requires=required,
    extras_require=extras,
    entry_points={
        'console_scripts': [
            "hestonvar = hestonvar.cli:main",
        ],
    },
    zip_safe=False,
    keywords="heston stochastic-volatility option-pricing finite-element variational garding",
    description="Weighted variational pricing toolkit for the Heston model",
    long_description=long_description,
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Programming Language :: Python :: 3'],
)
