from setuptools import setup, find_packages

setup(name='spvtx',
      version='0.1.0',
      description='ROI-preserving supervertex partitioning of icosphere meshes '
                  'and a mask-aware supervertex transformer',
      license='3-Clause BSD',
      packages=find_packages(),
      install_requires=['numpy', 'scipy', 'libpysal', 'pandas', 'seaborn',
                        'scikit-learn', 'tqdm', 'matplotlib'],
      extras_require={'metis': ['pymetis'],
                      'test': ['pytest']},
      entry_points={'console_scripts': ['spvtx=spvtx.cli:main']},
      include_package_data=True,
      zip_safe=False)
