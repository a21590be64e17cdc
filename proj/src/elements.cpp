//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/elements.hpp"

#include <array>

namespace solcur {
namespace {

struct ElementData {
  std::string_view symbol;
  double mass;
};

// Index = atomic number. Masses are conventional standard atomic weights;
// elements without a stable isotope use the mass number of the longest-lived
// isotope.
constexpr std::array<ElementData, kMaxAtomicNumber + 1> kElements = {{
    {"", 0.0},        {"H", 1.008},     {"He", 4.0026},   {"Li", 6.94},
    {"Be", 9.0122},   {"B", 10.81},     {"C", 12.011},    {"N", 14.007},
    {"O", 15.999},    {"F", 18.998},    {"Ne", 20.180},   {"Na", 22.990},
    {"Mg", 24.305},   {"Al", 26.982},   {"Si", 28.085},   {"P", 30.974},
    {"S", 32.06},     {"Cl", 35.45},    {"Ar", 39.948},   {"K", 39.098},
    {"Ca", 40.078},   {"Sc", 44.956},   {"Ti", 47.867},   {"V", 50.942},
    {"Cr", 51.996},   {"Mn", 54.938},   {"Fe", 55.845},   {"Co", 58.933},
    {"Ni", 58.693},   {"Cu", 63.546},   {"Zn", 65.38},    {"Ga", 69.723},
    {"Ge", 72.630},   {"As", 74.922},   {"Se", 78.971},   {"Br", 79.904},
    {"Kr", 83.798},   {"Rb", 85.468},   {"Sr", 87.62},    {"Y", 88.906},
    {"Zr", 91.224},   {"Nb", 92.906},   {"Mo", 95.95},    {"Tc", 98.0},
    {"Ru", 101.07},   {"Rh", 102.91},   {"Pd", 106.42},   {"Ag", 107.87},
    {"Cd", 112.41},   {"In", 114.82},   {"Sn", 118.71},   {"Sb", 121.76},
    {"Te", 127.60},   {"I", 126.90},    {"Xe", 131.29},   {"Cs", 132.91},
    {"Ba", 137.33},   {"La", 138.91},   {"Ce", 140.12},   {"Pr", 140.91},
    {"Nd", 144.24},   {"Pm", 145.0},    {"Sm", 150.36},   {"Eu", 151.96},
    {"Gd", 157.25},   {"Tb", 158.93},   {"Dy", 162.50},   {"Ho", 164.93},
    {"Er", 167.26},   {"Tm", 168.93},   {"Yb", 173.05},   {"Lu", 174.97},
    {"Hf", 178.49},   {"Ta", 180.95},   {"W", 183.84},    {"Re", 186.21},
    {"Os", 190.23},   {"Ir", 192.22},   {"Pt", 195.08},   {"Au", 196.97},
    {"Hg", 200.59},   {"Tl", 204.38},   {"Pb", 207.2},    {"Bi", 208.98},
    {"Po", 209.0},    {"At", 210.0},    {"Rn", 222.0},    {"Fr", 223.0},
    {"Ra", 226.0},    {"Ac", 227.0},    {"Th", 232.04},   {"Pa", 231.04},
    {"U", 238.03},    {"Np", 237.0},    {"Pu", 244.0},    {"Am", 243.0},
    {"Cm", 247.0},    {"Bk", 247.0},    {"Cf", 251.0},    {"Es", 252.0},
    {"Fm", 257.0},    {"Md", 258.0},    {"No", 259.0},    {"Lr", 266.0},
    {"Rf", 267.0},    {"Db", 268.0},    {"Sg", 269.0},    {"Bh", 270.0},
    {"Hs", 269.0},    {"Mt", 278.0},    {"Ds", 281.0},    {"Rg", 282.0},
    {"Cn", 285.0},    {"Nh", 286.0},    {"Fl", 289.0},    {"Mc", 290.0},
    {"Lv", 293.0},    {"Ts", 294.0},    {"Og", 294.0},
}};

constexpr std::array<int, 1> kValence1 = {1};
constexpr std::array<int, 1> kValence2 = {2};
constexpr std::array<int, 1> kValence3 = {3};
constexpr std::array<int, 1> kValence4 = {4};
constexpr std::array<int, 2> kValence35 = {3, 5};
constexpr std::array<int, 3> kValence246 = {2, 4, 6};

}  // namespace

std::string_view element_symbol(int atomic_number) {
  if (atomic_number < 1 || atomic_number > kMaxAtomicNumber) return {};
  return kElements[atomic_number].symbol;
}

double element_mass(int atomic_number) {
  if (atomic_number < 1 || atomic_number > kMaxAtomicNumber) return 0.0;
  return kElements[atomic_number].mass;
}

std::optional<int> find_element(std::string_view symbol) {
  for (int z = 1; z <= kMaxAtomicNumber; ++z) {
    if (kElements[z].symbol == symbol) return z;
  }
  return std::nullopt;
}

std::span<const int> default_valences(int atomic_number) {
  switch (atomic_number) {
  case 5:  // B
    return kValence3;
  case 6:  // C
    return kValence4;
  case 7:  // N
    return kValence3;
  case 8:  // O
    return kValence2;
  case 15:  // P
    return kValence35;
  case 16:  // S
    return kValence246;
  case 9:   // F
  case 17:  // Cl
  case 35:  // Br
  case 53:  // I
    return kValence1;
  default:
    return {};
  }
}

}  // namespace solcur
