#include "dgc/ast.hpp"

namespace dgc {

const char* shape_kind_name(shape_kind k) {
    switch (k) {
        case shape_kind::cube: return "cube";
        case shape_kind::cylinder: return "cylinder";
        case shape_kind::cone: return "cone";
        case shape_kind::sphere: return "sphere";
        case shape_kind::hemisphere: return "hemisphere";
        case shape_kind::disc: return "disc";
        case shape_kind::empty: return "empty";
    }
    return "empty";
}

const char* feature_name(feature f) {
    switch (f) {
        case feature::left: return "left";
        case feature::right: return "right";
        case feature::front: return "front";
        case feature::back: return "back";
        case feature::top: return "top";
        case feature::bottom: return "bottom";
        case feature::center: return "center";
    }
    return "center";
}

const char* axis_dir_name(axis_dir d) {
    switch (d) {
        case axis_dir::pos_x: return "+X";
        case axis_dir::neg_x: return "-X";
        case axis_dir::pos_y: return "+Y";
        case axis_dir::neg_y: return "-Y";
        case axis_dir::pos_z: return "+Z";
        case axis_dir::neg_z: return "-Z";
    }
    return "+Z";
}

feature face_of_axis(axis_dir d) {
    switch (d) {
        case axis_dir::pos_x: return feature::right;
        case axis_dir::neg_x: return feature::left;
        case axis_dir::pos_y: return feature::front;
        case axis_dir::neg_y: return feature::back;
        case axis_dir::pos_z: return feature::top;
        case axis_dir::neg_z: return feature::bottom;
    }
    return feature::top;
}

axis_dir axis_of_face(feature f) {
    switch (f) {
        case feature::right: return axis_dir::pos_x;
        case feature::left: return axis_dir::neg_x;
        case feature::front: return axis_dir::pos_y;
        case feature::back: return axis_dir::neg_y;
        case feature::top: return axis_dir::pos_z;
        case feature::bottom: return axis_dir::neg_z;
        case feature::center: break;
    }
    return axis_dir::pos_z;
}

const char* create_method_name(create_method m) {
    switch (m) {
        case create_method::primitive: return "primitive";
        case create_method::boolean_subtract: return "boolean_subtract";
        case create_method::boolean_union: return "boolean_union";
        case create_method::group: return "group";
        case create_method::extrude_from_sketch: return "extrude_from_sketch";
        case create_method::auto_connect: return "auto_connect";
    }
    return "primitive";
}

} // namespace dgc
