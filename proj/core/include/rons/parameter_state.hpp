#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rons/types.hpp"

namespace rons {

/// One component of a parameter vector. A complex component of C
/// coefficients occupies 2C real slots: all real parts, then all
/// imaginary parts.
struct Component {
  std::string name;
  std::size_t count = 0;
  bool is_complex = false;

  std::size_t stored_size() const { return is_complex ? 2 * count : count; }
};

/// Records where each component lives inside the flat parameter vector.
class Layout {
 public:
  Layout() = default;
  explicit Layout(std::vector<Component> components);

  static Layout real(std::size_t n, std::string name = "a");
  static Layout complex(std::size_t n, std::string name = "a");

  const std::vector<Component>& components() const { return components_; }
  std::size_t size() const { return total_; }
  std::size_t offset(std::size_t component) const;

 private:
  std::vector<Component> components_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

/// Time-dependent coefficient vector together with its layout.
class ParameterState {
 public:
  ParameterState() = default;
  ParameterState(Vector values, Layout layout);

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  const Layout& layout() const { return layout_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  /// Complex coefficients of a complex component.
  ComplexVector complex_component(std::size_t component) const;

 private:
  Vector values_;
  Layout layout_;
};

/// [Re z; Im z] stacking used for complex components.
Vector stack_complex(const ComplexVector& z);
ComplexVector unstack_complex(const Eigen::Ref<const Vector>& stacked);

}  // namespace rons
